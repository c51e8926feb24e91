"""Polygonal Markov field sampling and experiments."""

import json

from ._polyfield import (
    ClanError,
    ConfigError,
    Contour,
    Line,
    Rng,
    Window,
    build_id,
    config_hash,
    estimate_T,
    magnetisation,
    partition_function,
    render_svg,
    run_arak,
    run_config_json,
    sample_field,
    sample_poisson_lines,
    sample_typical_angle,
    skeleton,
    wulff_radius,
)


def run_config(config):
    """Run an experiment config given as a dict or JSON text.

    Returns (records, summary, csv) with records a list of dicts.
    """
    text = config if isinstance(config, str) else json.dumps(config)
    jsonl, summary, csv = run_config_json(text)
    records = [json.loads(line) for line in jsonl.splitlines() if line]
    return records, json.loads(summary), csv


__all__ = [
    "ClanError",
    "ConfigError",
    "Contour",
    "Line",
    "Rng",
    "Window",
    "build_id",
    "config_hash",
    "estimate_T",
    "magnetisation",
    "partition_function",
    "render_svg",
    "run_arak",
    "run_config",
    "sample_field",
    "sample_poisson_lines",
    "sample_typical_angle",
    "skeleton",
    "wulff_radius",
]
