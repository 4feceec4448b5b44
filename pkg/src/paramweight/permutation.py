"""Permutations of sheet labels, with 1-based cycle notation for I/O."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InputError


@dataclass(frozen=True)
class Permutation:
    """``images[i]`` is the image of ``i`` (0-based internally)."""

    images: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(int(i) for i in self.images))
        if sorted(self.images) != list(range(len(self.images))):
            raise InputError(f"{self.images} is not a permutation")

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(n)))

    @classmethod
    def from_cycles(cls, text: str, n: int) -> Permutation:
        """Parse 1-based cycle notation such as ``"(1 2)(3)"``; ``"()"`` is the identity."""
        if n < 1:
            raise InputError("permutation size must be positive")
        body = text.strip()
        if body in ("", "()", "id", "identity"):
            return cls.identity(n)
        if not re.fullmatch(r"\s*(\(\s*\d+(?:[\s,]+\d+)*\s*\)\s*)+", body):
            raise InputError(f"malformed cycle notation {text!r}")
        images = list(range(n))
        seen: set[int] = set()
        for group in re.findall(r"\(([^)]*)\)", body):
            cycle = [int(x) for x in re.split(r"[\s,]+", group.strip())]
            for x in cycle:
                if not 1 <= x <= n:
                    raise InputError(f"cycle entry {x} outside 1..{n}")
                if x in seen:
                    raise InputError(f"entry {x} appears in more than one cycle")
                seen.add(x)
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                images[a - 1] = b - 1
        return cls(tuple(images))

    def __len__(self):
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def compose(self, other: Permutation) -> Permutation:
        """``self`` after ``other``."""
        return Permutation(tuple(self.images[other.images[i]] for i in range(len(self))))

    def inverse(self) -> Permutation:
        inv = [0] * len(self)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def conjugate(self, relabel: Permutation) -> Permutation:
        """The same permutation expressed after renaming ``i -> relabel(i)``."""
        return relabel.compose(self).compose(relabel.inverse())

    def cycles(self) -> list[tuple[int, ...]]:
        """Cycles (0-based), each starting at its smallest element, fixed points included."""
        seen = set()
        out = []
        for start in range(len(self)):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            j = self.images[start]
            while j != start:
                cyc.append(j)
                seen.add(j)
                j = self.images[j]
            out.append(tuple(cyc))
        return out

    @property
    def n_cycles(self) -> int:
        return len(self.cycles())

    @property
    def cycle_type(self) -> tuple[int, ...]:
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def matrix(self) -> list[list[int]]:
        """Permutation matrix ``P`` with ``P e_i = e_{sigma(i)}``."""
        n = len(self)
        m = [[0] * n for _ in range(n)]
        for i, j in enumerate(self.images):
            m[j][i] = 1
        return m

    def __str__(self):
        moved = [c for c in self.cycles() if len(c) > 1]
        if not moved:
            return "()"
        return "".join("(" + " ".join(str(i + 1) for i in c) + ")" for c in moved)

    def full_notation(self) -> str:
        return "".join("(" + " ".join(str(i + 1) for i in c) + ")" for c in self.cycles())


def format_cycle_type(ct: tuple[int, ...]) -> str:
    return "(" + ",".join(str(k) for k in ct) + ")"
