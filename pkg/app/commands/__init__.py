"""Click subcommands of the pipeline CLI."""
