"""Incremental construction of layout specs from named tab stops."""

from typing import Dict, List, Optional, Sequence, Tuple

from app.core.schemas import Constraint, LayoutSpec, Relation


class LayoutBuilder:
    """Builds a LayoutSpec one tab stop and one constraint at a time.

    Tab stops are the layout variables; an area is the span between two tab
    stops. A tab stop of `None` stands for the window origin (coordinate 0).
    """

    def __init__(self):
        self._names: List[str] = []
        self._index: Dict[str, int] = {}
        self._constraints: List[Constraint] = []

    def tab(self, name: str) -> int:
        """Return the index of tab stop `name`, creating it on first use."""
        if name not in self._index:
            self._index[name] = len(self._names)
            self._names.append(name)
        return self._index[name]

    def add(
        self,
        terms: Sequence[Tuple[int, float]],
        relation: Relation,
        rhs: float,
        penalty: Optional[float] = None,
    ) -> "LayoutBuilder":
        self._constraints.append(
            Constraint(terms=tuple(terms), relation=relation, rhs=float(rhs), penalty=penalty)
        )
        return self

    def _span(self, start: Optional[int], end: int) -> Tuple[Tuple[int, float], ...]:
        if start is None:
            return ((end, 1.0),)
        return ((end, 1.0), (start, -1.0))

    def fix(self, tab: int, value: float, penalty: Optional[float] = None) -> "LayoutBuilder":
        """Place a tab stop at an absolute coordinate."""
        return self.add(((tab, 1.0),), Relation.EQ, value, penalty)

    def preferred(self, start: Optional[int], end: int, size: float,
                  penalty: Optional[float] = 1.0) -> "LayoutBuilder":
        """Span end - start should equal `size` (soft by default)."""
        return self.add(self._span(start, end), Relation.EQ, size, penalty)

    def minimum(self, start: Optional[int], end: int, size: float,
                penalty: Optional[float] = None) -> "LayoutBuilder":
        return self.add(self._span(start, end), Relation.GE, size, penalty)

    def maximum(self, start: Optional[int], end: int, size: float,
                penalty: Optional[float] = None) -> "LayoutBuilder":
        return self.add(self._span(start, end), Relation.LE, size, penalty)

    def align(self, tab: int, other: Optional[int], penalty: Optional[float] = None) -> "LayoutBuilder":
        """Put `tab` on the coordinate of `other` (the origin when None)."""
        return self.add(self._span(other, tab), Relation.EQ, 0.0, penalty)

    def within(self, tab: int, bound: int, penalty: Optional[float] = None) -> "LayoutBuilder":
        """Keep `tab` at or before `bound` (tab - bound <= 0)."""
        return self.add(((tab, 1.0), (bound, -1.0)), Relation.LE, 0.0, penalty)

    def build(self) -> LayoutSpec:
        return LayoutSpec(
            var_count=len(self._names),
            var_names=tuple(self._names),
            constraints=tuple(self._constraints),
        )


def three_button_spec(window_width: float = 300.0, preferred_width: float = 120.0,
                      penalty: float = 1.0) -> LayoutSpec:
    """Three buttons in a row that must exactly fill the window width.

    Each button prefers `preferred_width`; with the defaults the preferences
    overshoot the window by 60 pixels, which the solver has to distribute.
    """
    builder = LayoutBuilder()
    widths = [builder.tab(f"w{i}") for i in (1, 2, 3)]
    builder.add(tuple((w, 1.0) for w in widths), Relation.EQ, window_width)
    for w in widths:
        builder.add(((w, 1.0),), Relation.EQ, preferred_width, penalty)
    return builder.build()
