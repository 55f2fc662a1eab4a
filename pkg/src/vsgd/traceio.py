"""CSV persistence for step traces.

Fixed schema for every optimizer: columns an optimizer has no state for are
left empty, so files from different optimizers stay column-compatible.
Floats are serialized as shortest round-trip decimals (repr of a 64-bit
float), so re-parsing an emitted file reproduces the values bitwise.
"""
from __future__ import annotations

from .harness import StepTrace

__all__ = ["CSV_HEADER", "write_csv", "read_csv"]

CSV_HEADER = "t,loss,grad_norm,theta_norm,mean_b_g,mean_b_ghat,mean_sigma2"


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def write_csv(traces: list[StepTrace], path) -> None:
    """Write traces as UTF-8 CSV with LF line endings; traces must be nonempty."""
    if not traces:
        raise ValueError("refusing to write an empty trace list")
    lines = [CSV_HEADER]
    for tr in traces:
        lines.append(
            ",".join(
                (
                    str(tr.t),
                    _fmt(tr.loss),
                    _fmt(tr.grad_norm),
                    _fmt(tr.theta_norm),
                    _fmt(tr.mean_b_g),
                    _fmt(tr.mean_b_ghat),
                    _fmt(tr.mean_sigma2),
                )
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> list[StepTrace]:
    """Parse a file produced by write_csv back into StepTrace rows."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: missing or unexpected header")
    traces = []
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != 7:
            raise ValueError(f"{path}: malformed row {line!r}")
        traces.append(
            StepTrace(
                t=int(cells[0]),
                loss=float(cells[1]),
                grad_norm=float(cells[2]),
                theta_norm=float(cells[3]),
                mean_b_g=float(cells[4]) if cells[4] else None,
                mean_b_ghat=float(cells[5]) if cells[5] else None,
                mean_sigma2=float(cells[6]) if cells[6] else None,
            )
        )
    return traces
