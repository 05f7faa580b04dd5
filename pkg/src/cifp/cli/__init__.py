"""Command-line interface wiring the pipeline end to end."""
