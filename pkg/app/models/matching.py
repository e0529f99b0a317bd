"""Perfect matching and subset-DP count table models."""

from typing import Any

import numpy as np
from numpy.typing import NDArray

from app.exceptions import InvariantViolationException
from app.models.graph import BipartitePair


class Matching:
    """Perfect matching of a bipartite pair.

    ``partners[i]`` is the position in ``y_side`` of the partner of the i-th
    X-vertex, so the matching is stored positionally against its pair.
    """

    def __init__(
        self, x_side: list[int], y_side: list[int], partners: NDArray[np.int64], thinned: bool = False
    ) -> None:
        self.x_side = list(x_side)
        self.y_side = list(y_side)
        self.partners = np.array(partners, dtype=np.int64)
        self.partners.flags.writeable = False
        # drawn from an exact-density subgraph rather than the input pair
        self.thinned = thinned

    @classmethod
    def from_partners(cls, pair: BipartitePair, partners: NDArray[np.int64] | list[int]) -> "Matching":
        return cls(pair.x_side, pair.y_side, np.asarray(partners, dtype=np.int64))

    @property
    def size(self) -> int:
        return len(self.partners)

    def pairs(self) -> list[tuple[int, int]]:
        """Matched (x, y) vertex labels in X order."""
        return [(x, self.y_side[int(j)]) for x, j in zip(self.x_side, self.partners, strict=True)]

    def partner_of(self, x: int) -> int:
        return self.y_side[int(self.partners[self.x_side.index(x)])]

    def as_mapping(self) -> dict[int, int]:
        return dict(self.pairs())

    def validate(self, pair: BipartitePair) -> None:
        """Assert bijectivity and edge membership against the pair."""
        if self.size != pair.mx or pair.mx != pair.my:
            raise InvariantViolationException(
                "matching-shape", f"{self.size} partners for a {pair.mx}x{pair.my} pair"
            )
        if len(set(self.partners.tolist())) != self.size or np.any(
            (self.partners < 0) | (self.partners >= pair.my)
        ):
            raise InvariantViolationException("matching-bijective", f"partners {self.partners.tolist()}")
        rows = np.arange(self.size)
        missing = ~pair.matrix[rows, self.partners]
        if np.any(missing):
            i = int(np.flatnonzero(missing)[0])
            raise InvariantViolationException(
                "matching-edges",
                f"({pair.x_side[i]}, {pair.y_side[int(self.partners[i])]}) is not an edge",
            )

    def key(self) -> tuple[int, ...]:
        return tuple(int(j) for j in self.partners)

    def to_dict(self) -> dict[str, Any]:
        return {"pairs": [list(p) for p in self.pairs()]}

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Matching)
            and self.x_side == other.x_side
            and self.y_side == other.y_side
            and self.key() == other.key()
        )

    def __hash__(self) -> int:
        return hash((tuple(self.x_side), tuple(self.y_side), self.key()))

    def __repr__(self) -> str:
        return f"Matching(size={self.size}, partners={self.key()})"


class MatchingCountTable:
    """Subset DP over Y-masks for the rows of a bipartite pair.

    ``counts[mask]`` is the number of ways to match the first popcount(mask)
    X-rows bijectively onto the Y-columns in ``mask``. The full-mask entry is
    the permanent of the biadjacency matrix.
    """

    def __init__(self, m: int, counts: NDArray[Any]) -> None:
        self.m = m
        self.counts = counts

    @property
    def full_mask(self) -> int:
        return (1 << self.m) - 1

    @property
    def total(self) -> int:
        return int(self.counts[self.full_mask])

    def count(self, mask: int) -> int:
        return int(self.counts[mask])

    def __repr__(self) -> str:
        return f"MatchingCountTable(m={self.m}, total={self.total})"
