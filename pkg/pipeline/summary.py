"""Average number of candidate samples consumed per example."""

from typing import Iterable, Mapping, Union

from .models import TranspileResult


def samples_used_summary(results: Iterable[Union[TranspileResult, Mapping, int]]) -> float:
    """Mean samples used; examples never accepted already carry top_k. 0.0 when empty."""
    values = []
    for r in results:
        if isinstance(r, TranspileResult):
            values.append(r.samples_used)
        elif isinstance(r, Mapping):
            values.append(int(r["samples_used"]))
        else:
            values.append(int(r))
    return sum(values) / len(values) if values else 0.0
