"""Command-line front end: configuration, scenario runner, output files."""

from .config import DEFAULT_TEXT, RunConfig, parse_config
from .runner import RunSummary, run_scenario

__all__ = ["DEFAULT_TEXT", "RunConfig", "RunSummary", "parse_config", "run_scenario"]
