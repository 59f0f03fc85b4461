"""Automatic evaluation over run records: mean selected-text token count
(total length) and mean relation score, reported raw and x10."""

from __future__ import annotations

from pydantic import BaseModel, Field

from .errors import InvalidInputError
from .pipeline import RunRecord

RELATION_REPORT_SCALE = 10.0


class EvalRow(BaseModel):
    image_id: str
    tl: int
    relation: float


class EvalReport(BaseModel):
    n_images: int
    n_failed: int = 0
    tl_mean: float = Field(ge=0.0)
    relation_mean: float
    relation_mean_x10: float
    rows: list[EvalRow] = Field(default_factory=list)


def _successful(records: list[RunRecord]) -> list[RunRecord]:
    ok = [r for r in records if r.status == "ok" and r.selected_index is not None]
    if not ok:
        raise InvalidInputError("no successful records to evaluate")
    return ok


def token_count(text: str) -> int:
    return len(text.split())


def compute_tl(records: list[RunRecord]) -> float:
    """Mean whitespace-token count of selected full texts."""
    ok = _successful(records)
    return sum(token_count(r.selected_candidate.full_text) for r in ok) / len(ok)


def compute_relation_mean(records: list[RunRecord]) -> tuple[float, float]:
    """Mean selected relation score as (raw, x10-reported)."""
    ok = _successful(records)
    raw = sum(r.selected_score.relation for r in ok) / len(ok)
    return raw, raw * RELATION_REPORT_SCALE


def build_report(records: list[RunRecord]) -> EvalReport:
    ok = _successful(records)
    raw, reported = compute_relation_mean(records)
    return EvalReport(
        n_images=len(ok),
        n_failed=len(records) - len(ok),
        tl_mean=compute_tl(records),
        relation_mean=raw,
        relation_mean_x10=reported,
        rows=[EvalRow(image_id=r.image_id,
                      tl=token_count(r.selected_candidate.full_text),
                      relation=r.selected_score.relation)
              for r in ok],
    )
