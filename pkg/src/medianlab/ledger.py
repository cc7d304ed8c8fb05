"""Closed-form constants derived from an affine control function and approximation defects."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Affine:
    """t -> slope * t + offset."""

    slope: float
    offset: float

    def __call__(self, t):
        return self.slope * t + self.offset

    def to_json(self) -> dict:
        return {"slope": self.slope, "offset": self.offset}


@dataclass(frozen=True)
class ConstantLedger:
    K: float
    H0: float
    H: dict = field(default_factory=dict)
    depth: int = 4

    def rho(self, t):
        return self.K * t + self.H0

    def _h(self, p: int):
        if p not in self.H:
            raise KeyError(f"H({p}) is not set in this ledger")
        return self.H[p]

    @property
    def kappa0(self):
        h = self._h(3)
        return 2 * self.rho(3 * h) + 2 * h

    @property
    def kappa4(self):
        h = self._h(4)
        return 2 * self.rho(h) + 2 * h

    @property
    def kappa5(self):
        h = self._h(5)
        return self.rho(h) + self.rho(2 * h) + 2 * h

    def rho_n(self, n: int) -> Affine:
        """rho_1(t) = t, rho_n(t) = rho(rho_{n-1}(t) + t)."""
        f = Affine(1, 0)
        for _ in range(n - 1):
            f = Affine(self.K * (f.slope + 1), self.K * f.offset + self.H0)
        return f

    def H_n(self, n: int) -> Affine:
        """As a function of L: H_1 = 0, H_2 = L, H_n = rho(H_{n-1}) + L."""
        if n == 1:
            return Affine(0, 0)
        f = Affine(1, 0)
        for _ in range(n - 2):
            f = Affine(self.K * f.slope + 1, self.K * f.offset + self.H0)
        return f

    def C_n(self, n: int):
        c = self.kappa5
        for _ in range(n - 1):
            c = self.rho(c) + self.kappa5
        return c

    def D_n(self, n: int):
        d = 0
        for _ in range(n - 1):
            d = self.rho(d) + 2 * self.rho(self.kappa5) + 2 * self.kappa5
        return d

    @property
    def log_bound(self) -> tuple:
        h = self._h(4)
        return 2 * h, self.K + self.H0 - 2 * h

    def zeta_prime(self, zeta):
        return 2 * self._h(4) + zeta

    def to_json(self) -> dict:
        out = {"K": self.K, "H0": self.H0, "H": {str(p): v for p, v in sorted(self.H.items())}, "depth": self.depth}
        out["rho_n"] = {str(n): self.rho_n(n).to_json() for n in range(1, self.depth + 1)}
        out["H_n"] = {str(n): self.H_n(n).to_json() for n in range(1, self.depth + 1)}
        if 3 in self.H:
            out["kappa0"] = self.kappa0
        if 4 in self.H:
            out["kappa4"] = self.kappa4
            out["log_bound"] = list(self.log_bound)
        if 5 in self.H:
            out["kappa5"] = self.kappa5
            out["C_n"] = {str(n): self.C_n(n) for n in range(1, self.depth + 1)}
            out["D_n"] = {str(n): self.D_n(n) for n in range(1, self.depth + 1)}
        return out
