import csv
import json
import logging
import math
import os
import sys
from typing import Any, Dict, IO, List, Optional, Sequence

import yaml


def _default_config() -> Dict[str, Any]:
    return {
        'quadrature': {
            'abs_tol': 1e-9,
            'rel_tol': 1e-8,
            'max_subdivisions': 200,
            'tail_cut': 1e-12,
            'hermite_nodes': 80,
            'taylor_guard': 1e-4,
        },
        'special': {
            'rel_tol': 1e-12,
            'max_terms': 500,
        },
        'diagnostics': {
            'alpha': 0.001,
            'cdf_grid_points': 4097,
        },
        'cache': {
            'enabled': False,
            'dir': '~/.cache/vg-equations',
        },
        'logging': {
            'level': 'INFO',
            'file': None,
        },
    }


def deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    for key, value in update.items():
        if isinstance(value, dict) and key in base and isinstance(base[key], dict):
            deep_merge(base[key], value)
        else:
            base[key] = value
    return base


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """Load configuration from YAML file on top of the built-in defaults."""
    config = _default_config()

    if config_path is None:
        config_path = os.path.join(os.path.dirname(__file__), '..', '..', 'config', 'default.yaml')
        if not os.path.exists(config_path):
            return config

    try:
        with open(os.path.expanduser(config_path), 'r') as f:
            user_config = yaml.safe_load(f) or {}
    except (yaml.YAMLError, IOError) as e:
        logging.getLogger(__name__).warning("Ignoring config file %s: %s", config_path, e)
        return config

    if not isinstance(user_config, dict):
        return config
    return deep_merge(config, user_config)


def setup_logging(config: Dict[str, Any], silent: bool = False) -> None:
    """Setup logging configuration.

    Args:
        config: Configuration dictionary
        silent: If True, only warnings and errors reach standard error
    """
    logging_config = config.get('logging') or {}
    if not isinstance(logging_config, dict):
        raise ValueError(f"logging section must be a mapping, got {logging_config!r}")
    level = getattr(logging, str(logging_config.get('level', 'INFO')).upper(), logging.INFO)
    if silent:
        level = logging.WARNING

    # Standard output carries data, so the console handler writes to stderr
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]

    log_file = logging_config.get('file')
    if log_file:
        log_file = os.path.expanduser(log_file)
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True
    )


def parse_float_list(text: str) -> List[float]:
    """'0.5,0.1,0.02' -> [0.5, 0.1, 0.02]."""
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise ValueError(f"expected a comma-separated list of numbers, got {text!r}")


def format_number(value: Any) -> str:
    """CSV cell: 17 significant digits for floats, lowercase booleans."""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return format(value, '.17g')
    if value is None:
        return ''
    return str(value)


def json_value(value: Any) -> Any:
    """JSON-safe value: NaN and infinities become null."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_value(v) for v in value]
    return value


def write_csv(stream: IO[str], meta: Dict[str, Any], columns: Sequence[str],
              rows: Sequence[Dict[str, Any]]) -> None:
    for key, value in meta.items():
        stream.write(f"# {key}: {format_number(value)}\n")
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(row.get(column)) for column in columns])


def write_json(stream: IO[str], meta: Dict[str, Any], data: Any) -> None:
    json.dump({'meta': json_value(meta), 'data': json_value(data)}, stream, allow_nan=False)
    stream.write('\n')
