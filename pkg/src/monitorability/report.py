"""The per-formula classification report with its oracle cross-check."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .formula import Alphabet, AlphabetLike, Formula, print_formula
from .fragments import Classification, classify
from .pz import TruthDomain, epz_monitorable, ffm_monitorable, upz_monitorable
from .semantics import Polarity, Status, determines
from .traces import finite_traces


@dataclass(frozen=True)
class OracleCheck:
    """Exact determination answers compared against the bounded search."""

    bound: int
    agreements: int
    disagreements: tuple[dict, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "bound": self.bound,
            "agreements": self.agreements,
            "disagreements": list(self.disagreements),
        }


def oracle_check(f: Formula, alphabet: Alphabet, depth: int, bound: int) -> OracleCheck:
    """For every prefix up to ``depth`` and both polarities, an exact answer
    must agree with brute force: Determined is never refuted by the search,
    and NotDetermined is refuted by it whenever the bound reaches the
    counterexample."""
    agree = 0
    bad: list[dict] = []
    for s in finite_traces(alphabet, depth):
        for pol in Polarity:
            fast = determines(f, s, pol, bound, alphabet)
            if not fast.exact:
                agree += 1
                continue
            slow = determines(f, s, pol, bound, alphabet, exact_paths=False)
            if fast.status is Status.DETERMINED:
                ok = slow.status is not Status.NOT_DETERMINED
            else:
                ext = len(fast.counterexample) - len(s)
                ok = slow.status is Status.NOT_DETERMINED or ext > bound
            if ok:
                agree += 1
            else:
                bad.append(
                    {
                        "prefix": str(s),
                        "polarity": pol.value,
                        "exact": str(fast),
                        "bounded": str(slow),
                    }
                )
    return OracleCheck(bound, agree, tuple(bad))


@dataclass(frozen=True)
class ClassificationReport:
    formula: Formula
    alphabet: Alphabet | None
    classification: Classification
    oracle: OracleCheck | None
    pz: dict

    def as_dict(self) -> dict:
        c = self.classification
        return {
            "formula": print_formula(self.formula),
            "alphabet": None if self.alphabet is None else list(self.alphabet.actions),
            "level": c.level,
            "basis": c.basis,
            "fragments": {
                "shml": c.membership.shml,
                "chml": c.membership.chml,
                "ehml": c.membership.ehml,
                "ihml": None if c.ihml is None else c.ihml.kind,
                "pihml": None if c.pihml is None else c.pihml.kind,
            },
            "witnesses": list(c.witnesses),
            "oracle": None if self.oracle is None else self.oracle.as_dict(),
            "pz": self.pz,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=False)


def build_report(
    f: Formula,
    alphabet: AlphabetLike | None = None,
    bound: int = 6,
    depth: int = 2,
    pz: bool = True,
) -> ClassificationReport:
    c = classify(f, alphabet, bound)
    alpha = c.alphabet
    oracle = oracle_check(f, alpha, depth, bound) if alpha is not None else None
    pz_part: dict = {}
    if pz and alpha is not None:
        pz_part = {
            "epz": epz_monitorable(f, bound, alpha, bound).as_dict(),
            "upz": upz_monitorable(f, depth, bound, alpha, bound).as_dict(),
            "ffm": {
                d.value: ffm_monitorable(f, d, depth, bound, alpha).as_dict() for d in TruthDomain
            },
        }
    return ClassificationReport(f, alpha, c, oracle, pz_part)
