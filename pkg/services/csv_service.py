"""
CSV encoding of experiment results and LevSort correspondences
"""
from pathlib import Path
from typing import List, TextIO, Union
import csv
import io
import logging

from config.settings import settings
from models.schemas import ResultRecord, ResultTable, EstimatorName, ObservationModel, Arrangement

logger = logging.getLogger(__name__)

RESULT_COLUMNS = [
    "estimator", "n", "m", "d", "rank_a", "sigma", "model",
    "trial", "seed", "normalized_error", "elapsed_ms",
]
SKIP_PREFIX = "skip:"


def _real(x: float) -> str:
    return f"{x:.{settings.CSV_FLOAT_DIGITS}g}"


def _row(record: ResultRecord) -> List[str]:
    if record.skipped:
        error = f"{SKIP_PREFIX}{record.skip_reason}"
    else:
        error = _real(record.normalized_error)
    return [
        record.estimator.value, str(record.n), str(record.m), str(record.d), str(record.rank_a),
        _real(record.sigma), record.model.value, str(record.trial), str(record.seed),
        error, _real(record.elapsed_ms),
    ]


def write_results(table: ResultTable, stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for record in table.records:
        writer.writerow(_row(record))


def emit_csv(table: ResultTable, destination: Union[str, Path, TextIO]) -> None:
    """Write the table; destination is a path or an open text stream."""
    if hasattr(destination, "write"):
        write_results(table, destination)
        return
    path = Path(destination)
    buf = io.StringIO()
    write_results(table, buf)
    path.write_text(buf.getvalue())
    logger.info(f"Wrote {len(table)} records to {path}")


def results_to_text(table: ResultTable) -> str:
    buf = io.StringIO()
    write_results(table, buf)
    return buf.getvalue()


def parse_results(text: str) -> ResultTable:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != RESULT_COLUMNS:
        raise ValueError(f"unexpected results header: {reader.fieldnames}")
    records = []
    for row in reader:
        error = row["normalized_error"]
        skipped = error.startswith(SKIP_PREFIX)
        records.append(ResultRecord(
            estimator=EstimatorName(row["estimator"]),
            n=int(row["n"]), m=int(row["m"]), d=int(row["d"]), rank_a=int(row["rank_a"]),
            sigma=float(row["sigma"]),
            model=ObservationModel(row["model"]),
            trial=int(row["trial"]), seed=int(row["seed"]),
            normalized_error=None if skipped else float(error),
            elapsed_ms=float(row["elapsed_ms"]),
            skip_reason=error[len(SKIP_PREFIX):] if skipped else None,
        ))
    return ResultTable(records=records)


def read_csv(path: Union[str, Path]) -> ResultTable:
    return parse_results(Path(path).read_text())


def write_correspondence(path: Union[str, Path], arrangement: Arrangement) -> None:
    """target_row,source_row pairs, zero-based."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["target_row", "source_row"])
    for target_row, source_row in enumerate(arrangement.map):
        writer.writerow([target_row, source_row])
    Path(path).write_text(buf.getvalue())


def read_correspondence(path: Union[str, Path]) -> List[int]:
    reader = csv.DictReader(io.StringIO(Path(path).read_text()))
    pairs = sorted((int(row["target_row"]), int(row["source_row"])) for row in reader)
    return [source for _, source in pairs]
