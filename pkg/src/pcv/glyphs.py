"""Strong-key generation, glyph masks and lattice imprinting.

A strong key is rendered as a row of mildly deformed dot-matrix characters
whose stroke sites form a boolean mask over the lattice.  Imprinting forces
the coordinate sign to '+' inside the mask while keeping every |u_ij| and
all momenta, so the onsite potential and kinetic energy of every site are
untouched.
"""

from __future__ import annotations

import importlib.resources
import math
import secrets
from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, DoesNotFit, EntropyUnavailable
from .lattice import LatticeState

FONT_FILE = "font5x7_v1.txt"
FONT_W, FONT_H = 5, 7
GLYPH_W, GLYPH_H = 11, 21      # font scaled to lattice sites
GLYPH_GAP = 2                  # blank columns between glyph cells
CELL_W = GLYPH_W + GLYPH_GAP   # clip window width; windows tile disjointly
MAX_SHEAR_DEG = 15.0
MAX_VOFFSET = 3
MAX_HOFFSET = 1
MARGIN = 4                     # layout precondition: len*(w+gap) <= N - MARGIN

# Deformations are drawn from a small discrete grid rather than a continuum:
# 13 shear slopes spanning +-15 degrees, whole-glyph column offset in
# {-1,0,1} and row offset in {-3..3}.  A discrete grid keeps the family of
# possible glyph renderings finite, so template recognition can score an
# exact stroke-coverage match instead of a blurred correlation.
N_SLOPES = 13
SLOPES = np.linspace(-math.tan(math.radians(MAX_SHEAR_DEG)),
                     math.tan(math.radians(MAX_SHEAR_DEG)), N_SLOPES)


@dataclass(frozen=True)
class Charset:
    """Ordered symbol set for strong keys."""

    symbols: str
    id: int

    def __post_init__(self):
        if len(self.symbols) < 16:
            raise ValueError("charset needs at least 16 symbols")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("charset symbols must be unique")


# Default set drops the confusable pairs O/0 and I/1, plus Q and S,
# leaving exactly 30 symbols (~4.9 bits each).
DEFAULT_CHARSET = Charset("ABCDEFGHJKLMNPRTUVWXYZ23456789", id=1)
# Full alphanumerics, for experiments that need arbitrary words.
FULL_CHARSET = Charset("ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789", id=2)

_CHARSETS = {c.id: c for c in (DEFAULT_CHARSET, FULL_CHARSET)}


def charset_by_id(charset_id: int) -> Charset:
    try:
        return _CHARSETS[charset_id]
    except KeyError:
        raise ValueError(f"unknown charset id {charset_id}") from None


@dataclass(frozen=True)
class StrongKey:
    text: str
    charset: Charset = DEFAULT_CHARSET

    def __post_init__(self):
        if len(self.text) < 4:
            raise ValueError("strong key must have at least 4 characters")
        bad = set(self.text) - set(self.charset.symbols)
        if bad:
            raise ValueError(f"characters {sorted(bad)} not in charset")

    def __len__(self) -> int:
        return len(self.text)


@dataclass
class GlyphMask:
    """Stroke sites of a laid-out key, plus per-character bounding boxes."""

    bits: np.ndarray                       # N x N bool
    glyph_boxes: list[tuple[int, int, int, int]]  # (row0, col0, row1, col1), exclusive

    @property
    def stroke_fraction(self) -> float:
        return float(np.count_nonzero(self.bits)) / self.bits.size


def _load_font() -> dict[str, np.ndarray]:
    font: dict[str, np.ndarray] = {}
    text = (
        importlib.resources.files("pcv").joinpath("data").joinpath(FONT_FILE).read_text()
    )
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    i = 0
    while i < len(lines):
        ch = lines[i]
        rows = lines[i + 1 : i + 1 + FONT_H]
        font[ch] = np.array([[c == "1" for c in row] for row in rows], dtype=bool)
        i += 1 + FONT_H
    return font


FONT = _load_font()

# Sanity: no two glyph bitmaps may coincide, or the template oracle is blind.
assert len({f.tobytes() for f in FONT.values()}) == len(FONT)


def generate_sk(charset: Charset, length: int = 5, entropy=secrets) -> StrongKey:
    """Draw a uniform strong key from the OS secure random source.

    The physics PRNG is never used here; `entropy` must expose
    secrets-style `choice`.
    """
    if length < 4:
        raise ValueError("strong key length must be >= 4")
    try:
        text = "".join(entropy.choice(charset.symbols) for _ in range(length))
    except OSError as exc:
        raise EntropyUnavailable(str(exc)) from exc
    return StrongKey(text, charset)


def scaled_glyph(ch: str) -> np.ndarray:
    """Nearest-neighbour upscale of the 5x7 bitmap to GLYPH_W x GLYPH_H."""
    bitmap = FONT[ch]
    rows = (np.arange(GLYPH_H) * FONT_H) // GLYPH_H
    cols = (np.arange(GLYPH_W) * FONT_W) // GLYPH_W
    return bitmap[np.ix_(rows, cols)]


def glyph_cells(length: int, dims: int) -> list[tuple[int, int]]:
    """(row0, col0) of each glyph cell for a horizontally centred layout.

    Cells have pitch GLYPH_W + GLYPH_GAP and fixed height; deformation is
    clipped to the cell, so cells double as layout hints for recognition.
    """
    pitch = GLYPH_W + GLYPH_GAP
    if length * pitch > dims - MARGIN:
        raise DoesNotFit(f"{length} glyphs at pitch {pitch} exceed lattice {dims}")
    total = length * pitch - GLYPH_GAP
    col0 = (dims - total) // 2
    row0 = (dims - (GLYPH_H + 2 * MAX_VOFFSET)) // 2 + MAX_VOFFSET
    return [(row0, col0 + k * pitch) for k in range(length)]


def render_variant(ch: str, slope: float, hoffset: int) -> np.ndarray:
    """One deformed glyph on its GLYPH_H x CELL_W clip window.

    Rows are sheared about the vertical centre by `slope` and the whole
    glyph shifted by `hoffset` columns; strokes pushed outside the window
    are clipped.  Column 1 of the window corresponds to the undeformed
    glyph's left edge.
    """
    glyph = scaled_glyph(ch)
    cy = (GLYPH_H - 1) / 2.0
    out = np.zeros((GLYPH_H, CELL_W), dtype=bool)
    for r in range(GLYPH_H):
        shift = int(round(slope * (r - cy)))
        cols = np.arange(GLYPH_W) + shift + hoffset + 1
        ok = (cols >= 0) & (cols < CELL_W)
        out[r, cols[ok]] = glyph[r, ok]
    return out


def layout_masks(sk, dims: int, deform_seed: int, *,
                 deformed: bool = True) -> GlyphMask:
    """Render the key's characters into a lattice-site stroke mask.

    Accepts a StrongKey or a plain string (for single-glyph tests).  Each
    glyph gets a per-character shear slope, row offset and column offset
    drawn from a generator seeded with deform_seed; `deformed=False`
    renders the undeformed reference layout.
    """
    text = sk.text if isinstance(sk, StrongKey) else sk
    rng = np.random.Generator(np.random.PCG64(deform_seed))
    cells = glyph_cells(len(text), dims)
    bits = np.zeros((dims, dims), dtype=bool)
    boxes = []
    for ch, (r0, c0) in zip(text, cells):
        if deformed:
            slope = SLOPES[int(rng.integers(0, N_SLOPES))]
            dv = int(rng.integers(-MAX_VOFFSET, MAX_VOFFSET + 1))
            dc = int(rng.integers(-MAX_HOFFSET, MAX_HOFFSET + 1))
        else:
            slope, dv, dc = 0.0, 0, 0
        variant = render_variant(ch, slope, dc)
        # Clip window is [c0-1, c0+GLYPH_W+1): half the inter-glyph gap on
        # each side, so neighbouring windows tile without overlap.
        lo = c0 - 1
        bits[r0 + dv : r0 + dv + GLYPH_H, lo : lo + CELL_W] |= variant
        region = bits[:, lo : lo + CELL_W]
        rows_any = np.flatnonzero(region.any(axis=1))
        cols_any = np.flatnonzero(region.any(axis=0))
        boxes.append((int(rows_any[0]), int(lo + cols_any[0]),
                      int(rows_any[-1]) + 1, int(lo + cols_any[-1]) + 1))
    mask = GlyphMask(bits, boxes)
    # Legibility bounds: below 2% glyphs drown in domains, above 25% the
    # imprint dominates the final state.  Only meaningful for real keys
    # (>= 4 glyphs); shorter layouts are test renders.
    if len(text) >= 4 and not (0.02 <= mask.stroke_fraction <= 0.25):
        raise DoesNotFit(f"stroke fraction {mask.stroke_fraction:.3f} outside [0.02, 0.25]")
    return mask


def imprint(state: LatticeState, mask: GlyphMask) -> LatticeState:
    """Force u >= 0 inside the mask, leaving |u| and all momenta intact.

    The onsite potential is even in u and kinetic energy ignores u, so
    per-site energies are unchanged; only coupling terms move slightly.
    """
    if mask.bits.shape != state.u.shape:
        raise DimMismatch("mask dimensions do not match lattice")
    out = state.copy()
    out.u[mask.bits] = np.abs(out.u[mask.bits])
    return out


def render_pgm(bits: np.ndarray, scale: int = 8) -> bytes:
    """Binary P5 portable graymap: '+' sites dark (0), '-' sites light (255)."""
    if scale < 1:
        raise ValueError("scale must be >= 1")
    img = np.where(bits, 0, 255).astype(np.uint8)
    img = np.repeat(np.repeat(img, scale, axis=0), scale, axis=1)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


def render_ascii(bits: np.ndarray) -> str:
    """Terminal rendering: '#' for '+' sites, '.' for '-' sites."""
    return "\n".join("".join("#" if b else "." for b in row) for row in bits)


def render_image(field, scale: int = 8, fmt: str = "pgm") -> bytes:
    """Render a SignField; fmt is 'pgm' (binary P5) or 'ascii'."""
    bits = field.bits if hasattr(field, "bits") else np.asarray(field, dtype=bool)
    if fmt == "pgm":
        return render_pgm(bits, scale)
    if fmt == "ascii":
        return render_ascii(bits).encode()
    raise ValueError(f"unknown format {fmt!r}")
