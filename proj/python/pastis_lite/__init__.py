"""Many-against-many protein similarity search."""

import json

from ._core import (
    BalanceScheme,
    ConfigError,
    Edge,
    ExecutionMode,
    InputError,
    PastisError,
    SearchConfig,
    __version__,
    blocked_cost,
    classify_block,
    format_edge,
    generate,
    plain_cost,
    smith_waterman,
)
from ._core import search as _search
from ._core import search_file as _search_file


def make_config(**options):
    """Builds a SearchConfig from keyword arguments named like its attributes."""
    config = SearchConfig()
    for key, value in options.items():
        if not hasattr(config, key):
            raise ConfigError(f"unknown option {key!r}")
        if key == "balance" and isinstance(value, str):
            value = BalanceScheme.index if value == "index" else BalanceScheme.triangularity
        if key == "grid_mode" and isinstance(value, str):
            value = ExecutionMode.__members__[value]
        setattr(config, key, value)
    config.validate()
    return config


def search(records, **options):
    """Returns (edges, stats) for a list of (header, residues) pairs."""
    edges, stats = _search(list(records), make_config(**options))
    return edges, json.loads(stats)


def search_file(input_path, output_path, **options):
    """Searches a FASTA file and returns the stats that were written next to the output."""
    return json.loads(_search_file(str(input_path), str(output_path), make_config(**options)))


__all__ = [
    "BalanceScheme",
    "ConfigError",
    "Edge",
    "ExecutionMode",
    "InputError",
    "PastisError",
    "SearchConfig",
    "__version__",
    "blocked_cost",
    "classify_block",
    "format_edge",
    "generate",
    "make_config",
    "plain_cost",
    "search",
    "search_file",
    "smith_waterman",
]
