"""
Report emission (JSON and CSV) and the JSON schemas that define them.

Field names and ordering are part of the compatibility contract: the JSON
document is {config, windows[], aggregates, baselines} and the CSV has one
row per window with columns window_index, first_ordinal, last_ordinal,
<measure columns>, participation, largest_bloc_share.
"""
import io
import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

import pandas as pd
from jsonschema import Draft202012Validator

from governance.exceptions import ParameterError, ReportWriteError, SchemaError
from metrics.entropy import EntropyMeasure

from .baselines import BaselineReport
from .windows import WindowResult, WindowSeries

logger = logging.getLogger(__name__)

SCHEMA_DIR = Path(__file__).resolve().parent / 'schemas'
FORMATS = ('json', 'csv')


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    return json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text(encoding='utf-8'))


def report_schema() -> dict:
    return load_schema('report')


def validate_payload(payload: dict, schema: str = 'report') -> None:
    """Raise SchemaError listing every violation of the named schema."""
    validator = Draft202012Validator(load_schema(schema))
    problems = sorted(validator.iter_errors(payload), key=lambda e: list(e.path))
    if problems:
        details = '; '.join(f"{'/'.join(map(str, p.path)) or '<root>'}: {p.message}" for p in problems)
        raise SchemaError(f"Document does not match the {schema} schema: {details}")


def _window_dict(result: WindowResult) -> dict:
    return {
        'window_index': result.window_index,
        'first_ordinal': result.first_ordinal,
        'last_ordinal': result.last_ordinal,
        'elections': list(result.election_ids),
        'values': dict(result.values),
        'participation': result.participation,
        'largest_bloc_share': result.largest_bloc_share,
        'cluster_sizes': list(result.cluster_sizes),
        'cluster_masses': list(result.cluster_masses),
        'effective_k': result.effective_k,
        'degenerate': result.degenerate,
    }


def report_payload(series: WindowSeries, baselines: Optional[BaselineReport] = None) -> dict:
    return {
        'config': dict(series.config),
        'windows': [_window_dict(r) for r in series.results],
        'aggregates': series.aggregates,
        'baselines': baselines.to_dict() if baselines is not None else None,
    }


def csv_frame(series: WindowSeries) -> pd.DataFrame:
    columns = ['window_index', 'first_ordinal', 'last_ordinal', *series.measures, 'participation', 'largest_bloc_share']
    rows = [
        [r.window_index, r.first_ordinal, r.last_ordinal, *(r.values[m] for m in series.measures),
         r.participation, r.largest_bloc_share]
        for r in series.results
    ]
    return pd.DataFrame(rows, columns=columns)


def render_json(payload: dict) -> bytes:
    return (json.dumps(payload, indent=2, allow_nan=False) + '\n').encode('utf-8')


def emit_report(series: WindowSeries, baselines: Optional[BaselineReport] = None, fmt: str = 'json',
                destination: Union[str, Path, None] = None) -> bytes:
    """
    Serialize a window series.

    Args:
        series: WindowSeries (may be empty)
        baselines: Optional BaselineReport, JSON only
        fmt: 'json' or 'csv'
        destination: File to write; nothing is written when None

    Returns:
        The encoded report
    """
    if fmt not in FORMATS:
        raise ParameterError(f"Unknown report format {fmt!r}; expected json or csv")

    if fmt == 'json':
        payload = report_payload(series, baselines)
        validate_payload(payload)
        data = render_json(payload)
    else:
        buffer = io.StringIO()
        csv_frame(series).to_csv(buffer, index=False, lineterminator='\n')
        data = buffer.getvalue().encode('utf-8')

    if destination is not None:
        write_bytes(destination, data)
    return data


def write_bytes(destination: Union[str, Path], data: bytes) -> None:
    path = Path(destination)
    try:
        path.write_bytes(data)
    except OSError as e:
        raise ReportWriteError(f"Cannot write report to {path}: {e}") from e
    logger.info("Wrote %d bytes to %s", len(data), path)


def series_from_report(document: Union[bytes, str, dict]) -> WindowSeries:
    """Rebuild a WindowSeries from an emitted JSON report."""
    payload = json.loads(document) if isinstance(document, (bytes, str)) else document
    validate_payload(payload)
    config = payload['config']
    measures = tuple(EntropyMeasure.parse(m).column for m in config['measures'])
    results = tuple(
        WindowResult(
            window_index=w['window_index'],
            election_ids=tuple(w['elections']),
            first_ordinal=w['first_ordinal'],
            last_ordinal=w['last_ordinal'],
            values={k: float(v) for k, v in w['values'].items()},
            participation=float(w['participation']),
            largest_bloc_share=float(w['largest_bloc_share']),
            cluster_sizes=tuple(w['cluster_sizes']),
            cluster_masses=tuple(float(m) for m in w['cluster_masses']),
            effective_k=w['effective_k'],
            degenerate=w['degenerate'],
        )
        for w in payload['windows']
    )
    return WindowSeries(results=results, measures=measures, config=dict(config))
