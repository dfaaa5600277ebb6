"""
Shared CLI plumbing: global flags, parameter flags and run-file merging.
"""

import argparse
from typing import Any, Callable, Dict, Optional

from pydantic import ValidationError

from starkchain.core.config import get_settings, load_run_file
from starkchain.core.errors import ConfigError
from starkchain.models import ChainParams


def global_parent() -> argparse.ArgumentParser:
    """Flags accepted after any subcommand."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="flat KEY=value run file (N, J, gamma, F1, F2, ...)")
    parent.add_argument("--out", help="output directory (default: settings output_dir)")
    parent.add_argument("--threads", type=int, help="worker processes; affects wall time only")
    parent.add_argument("--log-level", help="DEBUG, INFO, WARNING, ERROR")
    return parent


def params_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("chain parameters")
    group.add_argument("--N", type=int)
    group.add_argument("--J", type=float)
    group.add_argument("--gamma", type=float)
    group.add_argument("--F1", type=float)
    group.add_argument("--F2", type=float)
    group.add_argument("--ratio", type=float, help="sets F1 = ratio * F2")
    return parent


def file_values(args: argparse.Namespace) -> Dict[str, Any]:
    return load_run_file(args.config) if getattr(args, "config", None) else {}


def pick(args: argparse.Namespace, values: Dict[str, Any], flag: str, key: Optional[str] = None, default: Any = None) -> Any:
    """CLI flag, then run-file key, then default."""
    value = getattr(args, flag, None)
    if value is not None:
        return value
    return values.get(key or flag, default)


def collect_params(args: argparse.Namespace, values: Dict[str, Any]) -> ChainParams:
    raw = {key: pick(args, values, key) for key in ("N", "J", "gamma", "F1", "F2")}
    ratio = pick(args, values, "ratio")
    if ratio is not None:
        if raw["F2"] is None:
            raise ConfigError("ratio given without F2", key="ratio")
        raw["F1"] = ratio * raw["F2"]
    missing = [key for key, value in raw.items() if value is None]
    if missing:
        raise ConfigError(f"missing chain parameter(s): {', '.join(missing)}", key=missing[0])
    return validated(lambda: ChainParams(**raw))


def validated(build: Callable[[], Any]) -> Any:
    """Turn pydantic validation failures into ConfigError naming the first bad key."""
    try:
        return build()
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"invalid configuration at {key or 'root'}: {first['msg']}", key=key) from e


def output_dir(args: argparse.Namespace) -> str:
    return args.out or get_settings().output_dir
