#!/usr/bin/env python3
"""
Shared utilities for the positive-map toolkit: seeded random streams,
complex (de)serialization, and report files
"""

import json
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from config import DEFAULT_REPORT_FILENAME, DEFAULT_CSV_FILENAME

# Printed precision of every numeric report field
SIGNIFICANT_DIGITS = 12


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """
    Counter-based generator for one independent stream

    Args:
        seed: User seed (64-bit)
        stream: Stream coordinates, e.g. (purpose, restart index)

    Returns:
        Philox-backed numpy Generator; the same (seed, stream) always yields
        the same draws regardless of how many other streams were used
    """
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(s) for s in stream)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def random_complex(rng: np.random.Generator, shape) -> np.ndarray:
    """Independent standard-normal real and imaginary parts"""
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    vec = random_complex(rng, dim)
    return vec / np.linalg.norm(vec)


def round_sig(value: float, digits: int = SIGNIFICANT_DIGITS) -> float:
    """
    Round to a fixed number of significant digits so reports are byte-stable
    """
    value = float(value)
    if value == 0.0 or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def complex_to_pairs(values) -> List[List[float]]:
    """
    Flatten an array (row-major) into [re, im] pairs
    """
    flat = np.asarray(values, dtype=complex).reshape(-1)
    return [[round_sig(z.real), round_sig(z.imag)] for z in flat]


def pairs_to_complex(pairs: Sequence[Sequence[float]], where: str = "data") -> np.ndarray:
    """
    Inverse of complex_to_pairs; raises ValueError naming the bad entry
    """
    out = np.empty(len(pairs), dtype=complex)
    for idx, pair in enumerate(pairs):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ValueError(f"{where}[{idx}]: expected [re, im] pair, got {pair!r}")
        re, im = pair
        if isinstance(re, bool) or isinstance(im, bool) or not isinstance(re, (int, float)) or not isinstance(im, (int, float)):
            raise ValueError(f"{where}[{idx}]: entries must be numbers, got {pair!r}")
        out[idx] = complex(re, im)
    return out


def to_jsonable(obj: Any) -> Any:
    """
    Convert numpy scalars/arrays (nested in dicts and lists) into JSON types;
    complex arrays become {"shape": [...], "data": [[re, im], ...]}
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return {"shape": list(obj.shape), "data": complex_to_pairs(obj)}
    if isinstance(obj, (complex, np.complexfloating)):
        return [round_sig(obj.real), round_sig(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_sig(obj)
    return obj


def dump_report(report: Dict[str, Any]) -> str:
    """Serialize a report deterministically (sorted keys, fixed precision)"""
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True, ensure_ascii=False)


def save_report(report: Dict[str, Any], filename: str = DEFAULT_REPORT_FILENAME) -> None:
    """
    Save a report to a JSON file

    Args:
        report: Report dictionary
        filename: Path to save the JSON file
    """
    with open(filename, 'w', encoding='utf-8') as f:
        f.write(dump_report(report))
        f.write("\n")


def load_report(filename: str = DEFAULT_REPORT_FILENAME) -> Dict[str, Any]:
    with open(filename, 'r', encoding='utf-8') as f:
        return json.load(f)


def trials_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    """
    Per-trial table of a verification suite (one row per trial)
    """
    frame = pd.DataFrame(rows)
    if not frame.empty and 'trial' in frame.columns:
        frame = frame.set_index('trial')
    return frame


def summarize_trials(frame: pd.DataFrame, columns: Optional[Sequence[str]] = None) -> Dict[str, Dict[str, float]]:
    """
    Max/min/mean of the numeric columns of a trial table
    """
    if frame.empty:
        return {}
    numeric = frame.select_dtypes(include='number')
    if columns is not None:
        numeric = numeric[[c for c in columns if c in numeric.columns]]
    return {
        col: {
            'max': round_sig(numeric[col].max()),
            'min': round_sig(numeric[col].min()),
            'mean': round_sig(numeric[col].mean()),
        }
        for col in numeric.columns
    }


def save_csv_report(frame: pd.DataFrame, filename: str = DEFAULT_CSV_FILENAME) -> None:
    """
    Save a trial table in CSV format for analysis
    """
    frame.to_csv(filename, float_format=f"%.{SIGNIFICANT_DIGITS}g")


def print_summary(title: str, lines: Dict[str, Any]) -> None:
    """
    Print a standardized banner summary

    Args:
        title: Banner title
        lines: Label -> value pairs printed in order
    """
    print("\n" + "=" * 60)
    print(title.upper())
    print("=" * 60)
    for label, value in lines.items():
        if isinstance(value, float):
            value = f"{value:.{SIGNIFICANT_DIGITS}g}"
        print(f"{label}: {value}")
    print("=" * 60)
