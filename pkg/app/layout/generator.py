"""Seeded random layouts of growing size for the benchmark suite.

Every widget adds four constraints: two hard ones placing its left and top
tab stops on a randomly chosen earlier tab stop (or the window origin), and
two soft preferred sizes from there to its own right and bottom tab stops.
The first widget instead fixes the window edges and measures its sizes from
the origin. All randomness comes from a 64-bit xorshift generator so that
suites are identical across platforms.
"""

import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

from app.core.schemas import GenConfig, GeneratedLayout, LayoutSpec, SuiteEntry
from app.layout.builder import LayoutBuilder
from app.layout.spec_io import write_spec

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
MIN_EXTENT = 20
MAX_EXTENT = 200
PREFERRED_PENALTY = 1.0


def splitmix64(value: int) -> int:
    """One splitmix64 step; used for seeding."""
    z = (value + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class XorShift64:
    """xorshift64 generator (shifts 13, 7, 17) seeded through splitmix64."""

    def __init__(self, seed: int):
        state = splitmix64(seed & MASK64)
        self.state = state or 0x9E3779B97F4A7C15

    def next(self) -> int:
        x = self.state
        x ^= (x << 13) & MASK64
        x ^= x >> 7
        x ^= (x << 17) & MASK64
        self.state = x
        return x

    def below(self, n: int) -> int:
        """Integer in [0, n)."""
        if n <= 0:
            raise ValueError(f"range must be positive, got {n}")
        return self.next() % n

    def between(self, low: int, high: int) -> int:
        """Integer in [low, high]."""
        return low + self.below(high - low + 1)


def derive_seed(seed: int, size: int, index: int) -> int:
    """Seed of layout `index` of constraint count `size` in a suite."""
    return splitmix64((seed ^ (size * 1_000_003 + index)) & MASK64)


def generate_layout(widgets: int, seed: int, window: Tuple[int, int] = (800, 600)) -> LayoutSpec:
    """
    Build a random layout of `widgets` widgets (4 * widgets constraints).

    Variables are `right` and `bottom` (window edges), `x1` and `y1`, then
    `l<k>`, `t<k>`, `x<k>`, `y<k>` (left, top, right, bottom) for every
    later widget k.
    """
    if widgets < 1:
        raise ValueError(f"need at least one widget, got {widgets}")
    width, height = window
    rng = XorShift64(seed)
    builder = LayoutBuilder()
    right = builder.tab("right")
    bottom = builder.tab("bottom")

    # None is the window origin.
    x_stops: List[Optional[int]] = [None]
    y_stops: List[Optional[int]] = [None]

    for k in range(1, widgets + 1):
        w = rng.between(MIN_EXTENT, MAX_EXTENT)
        h = rng.between(MIN_EXTENT, MAX_EXTENT)

        if k == 1:
            left, top = None, None
            builder.fix(right, width).fix(bottom, height)
        else:
            left = builder.tab(f"l{k}")
            top = builder.tab(f"t{k}")
            builder.align(left, x_stops[rng.below(len(x_stops))])
            builder.align(top, y_stops[rng.below(len(y_stops))])

        x_k = builder.tab(f"x{k}")
        y_k = builder.tab(f"y{k}")
        builder.preferred(left, x_k, w, PREFERRED_PENALTY)
        builder.preferred(top, y_k, h, PREFERRED_PENALTY)
        x_stops.append(x_k)
        y_stops.append(y_k)

    return builder.build()


def plan_suite(cfg: GenConfig) -> List[SuiteEntry]:
    """Every (size, index, seed) of a suite, in size order."""
    return [
        SuiteEntry(size=size, index=index, seed=derive_seed(cfg.seed, size, index))
        for size in cfg.sizes()
        for index in range(cfg.per_size)
    ]


def build_entry(entry: SuiteEntry, window: Tuple[int, int] = (800, 600)) -> GeneratedLayout:
    return GeneratedLayout(entry=entry, spec=generate_layout(entry.widgets, entry.seed, window))


def generate_suite(cfg: GenConfig) -> List[GeneratedLayout]:
    """Build every layout of a suite."""
    suite = [build_entry(entry, cfg.window) for entry in plan_suite(cfg)]
    logger.info(f"Generated {len(suite)} layouts, sizes {cfg.min_size}..{cfg.max_size} step {cfg.step}")
    return suite


def write_suite(cfg: GenConfig, out_dir: Union[str, Path]) -> List[Path]:
    """Generate a suite straight to `layout_c{count}_i{index}.spec` files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for entry in plan_suite(cfg):
        layout = build_entry(entry, cfg.window)
        paths.append(write_spec(out_dir / entry.file_name, layout.spec))
    logger.info(f"Wrote {len(paths)} spec files to {out_dir}")
    return paths
