from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ValueSurface:
    """Per-cell state values indexed ``[x, y]``.

    Only entries where ``free`` is True are meaningful; the rest are filled so
    that contour plots render.
    """

    size_n: int
    values: np.ndarray
    free: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        free = np.asarray(self.free, dtype=bool)
        if values.shape != (self.size_n, self.size_n) or free.shape != values.shape:
            raise ValueError(f"surface arrays must be {self.size_n}x{self.size_n}")
        if not np.all(np.isfinite(values)):
            raise ValueError("surface contains non-finite values")
        if not free.any():
            raise ValueError("surface has no free cells")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "free", free)

    @property
    def value_max(self) -> float:
        return float(self.values[self.free].max())

    @property
    def value_min(self) -> float:
        return float(self.values[self.free].min())

    def argmax(self) -> tuple[int, int]:
        masked = np.where(self.free, self.values, -np.inf)
        x, y = np.unravel_index(int(np.argmax(masked)), masked.shape)
        return int(x), int(y)

    def argmin(self) -> tuple[int, int]:
        masked = np.where(self.free, self.values, np.inf)
        x, y = np.unravel_index(int(np.argmin(masked)), masked.shape)
        return int(x), int(y)

    def to_dict(self) -> dict:
        return {"size_n": self.size_n, "values": self.values.tolist(), "free": self.free.astype(int).tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> ValueSurface:
        return cls(int(data["size_n"]), np.array(data["values"], dtype=float), np.array(data["free"], dtype=bool))
