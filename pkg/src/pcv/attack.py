"""Brute-force attacker simulation and the template recognition oracle.

The oracle models the image-recognition step a real attacker must run on
every candidate password.  Glyph layouts draw deformations from a small
discrete grid, so recognition enumerates the same grid and scores stroke
purity: the fraction of a candidate template's pixels that are '+' in the
image.  The true glyph always reaches purity 1 at its exact deformation;
among maximal-purity candidates the winner is the one that best explains
the rest of its cell as featureless thermal background (lowest leftover-
ink entropy cost) with the least ink pressed against its outline.  The
harness knows the true password so the separation between true and wrong
candidate scores is measurable; a real attacker has only the scores.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .glyphs import (CELL_W, Charset, GLYPH_H, MAX_HOFFSET, MAX_VOFFSET,
                     glyph_cells, render_variant, SLOPES)
from .lattice import SignField
from . import vault

ORACLE_SECONDS_PER_IMAGE = (1.0, 10.0)  # published cost range for CAPTCHA solvers

_PURITY_EPS = 1e-12
_RING_WEIGHT = 0.1      # ink-on-outline penalty, per ring pixel
_Q_CLIP = 0.02          # background rate clamp for the entropy term
_WIN_H = GLYPH_H + 2 * MAX_VOFFSET   # cell window height incl. row offsets


@lru_cache(maxsize=8)
def _template_bank(symbols: str):
    """Every deformation variant at every row offset, on the cell window.

    Variants enumerate the same discrete grid layout_masks draws from
    (slope x column offset x row offset).  Returns flat boolean-as-float
    matrices over the _WIN_H x CELL_W window: templates, one-pixel outline
    rings, the owning symbol index per variant, and per-variant stroke,
    ring and off-template pixel counts.
    """
    base = []
    for idx, ch in enumerate(symbols):
        for slope in SLOPES:
            for dc in range(-MAX_HOFFSET, MAX_HOFFSET + 1):
                base.append((idx, render_variant(ch, slope, dc)))
    tpl, ring, owner = [], [], []
    for dv in range(-MAX_VOFFSET, MAX_VOFFSET + 1):
        for idx, t in base:
            canvas = np.zeros((_WIN_H, CELL_W), dtype=bool)
            canvas[dv + MAX_VOFFSET : dv + MAX_VOFFSET + GLYPH_H] = t
            tpl.append(canvas)
            ring.append(ndimage.binary_dilation(canvas) & ~canvas)
            owner.append(idx)
    tpl = np.array(tpl).reshape(len(tpl), -1)
    ring = np.array(ring).reshape(len(ring), -1)
    ns = tpl.sum(axis=1)
    return (tpl.astype(np.float64), ring.astype(np.float64),
            np.array(owner), ns, ring.sum(axis=1), tpl.shape[1] - ns)


def _decode_cell(window: np.ndarray, bank) -> tuple[int, float]:
    """Pick the symbol for one glyph cell window (_WIN_H x CELL_W ink bits).

    Candidates are the maximal-purity variants.  Each is scored by how well
    it explains the remaining ink: the off-template region is modelled as
    i.i.d. background whose rate is estimated per candidate, giving an
    entropy cost; ink on the candidate's one-pixel outline adds a penalty
    (a true glyph touches background there, an impostor inside a larger
    ink shape touches strokes).  Returns (symbol index, purity - ring rate
    of the winner).
    """
    tpl, ring, owner, ns, nr, n_out = bank
    w = window.ravel().astype(np.float64)
    cov = tpl @ w
    purity = cov / ns
    ink_out = w.sum() - cov
    q = np.clip(ink_out / n_out, _Q_CLIP, 1.0 - _Q_CLIP)
    bg_loglik = n_out * (q * np.log(q) + (1.0 - q) * np.log(1.0 - q))
    ring_ink = ring @ w
    score = bg_loglik - _RING_WEIGHT * ring_ink
    score[purity < purity.max() - _PURITY_EPS] = -np.inf
    j = int(np.argmax(score))
    return int(owner[j]), float(purity[j] - ring_ink[j] / nr[j])


def template_oracle(image, charset: Charset, sk_len: int) -> tuple[str, float]:
    """Decode a candidate image; returns (text, mean per-glyph score).

    Glyph cells are the deterministic layout positions for (sk_len, N), so
    the oracle needs no secret layout hints.  Deterministic for a fixed
    image.  The per-glyph score is winning purity minus winning ring rate,
    in [-1, 1]; clean imprints score high, chaotic backgrounds lower.
    """
    bits = image.bits if isinstance(image, SignField) else np.asarray(image, dtype=bool)
    n = bits.shape[0]
    cells = glyph_cells(sk_len, n)
    bank = _template_bank(charset.symbols)
    text = []
    scores = []
    for (r0, c0) in cells:
        window = bits[r0 - MAX_VOFFSET : r0 + GLYPH_H + MAX_VOFFSET,
                      c0 - 1 : c0 - 1 + CELL_W]
        k, score = _decode_cell(window, bank)
        text.append(charset.symbols[k])
        scores.append(score)
    return "".join(text), float(np.mean(scores))


@dataclass
class CandidateResult:
    password: str
    decoded: str
    score: float
    integrate_seconds: float
    recognize_seconds: float
    is_true: bool

    def to_json(self) -> str:
        return json.dumps({
            "password": self.password, "decoded": self.decoded,
            "score": self.score, "integrate_seconds": self.integrate_seconds,
            "recognize_seconds": self.recognize_seconds, "is_true": self.is_true,
        })


@dataclass
class AttackReport:
    candidates: list[CandidateResult]
    success: bool
    separation: float          # true score minus best wrong score
    threshold: float           # null mean + 3 sigma over wrong candidates

    @property
    def tried(self) -> int:
        return len(self.candidates)

    def wrong_scores(self) -> np.ndarray:
        return np.array([c.score for c in self.candidates if not c.is_true])

    def true_score(self) -> float:
        return next(c.score for c in self.candidates if c.is_true)

    def to_jsonl(self) -> str:
        lines = [c.to_json() for c in self.candidates]
        lines.append(json.dumps({
            "summary": True, "tried": self.tried, "success": self.success,
            "separation": self.separation, "threshold": self.threshold,
        }))
        return "\n".join(lines) + "\n"


def brute_force_sim(container, candidate_passwords: list[str], true_sp: str,
                    oracle=template_oracle) -> AttackReport:
    """Run the phase-1 + recognition loop over every candidate password.

    Success requires the top-scoring candidate to be the true password and
    its decoded strong key to open the payload in phase 2.
    """
    if true_sp not in candidate_passwords:
        raise ValueError("candidate list must contain the true password")
    if len(candidate_passwords) > 10_000:
        raise ValueError("candidate list capped at 10^4 (desk scale)")
    if not isinstance(container, vault.VaultContainer):
        container = vault.parse_container(container)
    from .glyphs import charset_by_id
    charset = charset_by_id(container.charset_id)
    results = []
    for sp in candidate_passwords:
        t0 = time.perf_counter()
        session = vault.decrypt_phase1(container, sp)
        t1 = time.perf_counter()
        decoded, score = oracle(session.image, charset, container.sk_len)
        t2 = time.perf_counter()
        results.append(CandidateResult(sp, decoded, score, t1 - t0, t2 - t1,
                                       sp == true_sp))
    wrong = np.array([c.score for c in results if not c.is_true])
    threshold = float(wrong.mean() + 3.0 * wrong.std()) if wrong.size else 0.0
    top = max(results, key=lambda c: c.score)
    success = False
    if top.is_true:
        session = vault.decrypt_phase1(container, top.password)
        try:
            vault.decrypt_phase2(session, top.decoded)
            success = True
        except Exception:
            success = False
    true_score = next(c.score for c in results if c.is_true)
    best_wrong = float(wrong.max()) if wrong.size else float("-inf")
    return AttackReport(results, success, true_score - best_wrong, threshold)


def attack_time_estimate(length: int, alphabet: int = 80,
                         rate: float = 1000.0) -> Fraction:
    """Brute-force wall time alphabet^length / rate, exact big-number seconds.

    rate is candidate recognitions per second across all parallel workers.
    Note: the companion write-up's 38-day figure for length 5 at rate 1000
    follows from this formula; its multi-millennium figure for length 6
    does not, and is not reproduced here (see README).
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if rate <= 0:
        raise ValueError("rate must be positive")
    return Fraction(alphabet) ** length / Fraction(rate)


def humanize_seconds(seconds) -> str:
    s = float(seconds)
    for unit, div in (("s", 1.0), ("minutes", 60.0), ("hours", 3600.0),
                      ("days", 86400.0), ("years", 86400.0 * 365.25)):
        if s / div < (1000 if unit == "s" else 100) or unit == "years":
            return f"≈ {s / div:.1f} {unit}"
    return f"≈ {s:.3g} s"
