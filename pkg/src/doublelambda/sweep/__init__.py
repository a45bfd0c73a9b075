"""Configuration, orchestration and command-line entry point."""
