"""Arithmetic-cost accounting for the SIC precoder.

Costs are expressed in complex multiplications and complex divisions;
additions, comparisons and modulus extraction are free.  A vector divided by
a scalar counts as a single division (the reciprocal is formed once).  Under
this accounting the designer's four stages cost, for ``N`` subarrays of ``M``
antennas, ``K`` receive antennas and ``S`` eigensolver iterations:

* first Gram block:            ``K * M^2`` multiplications
* eigensolver, per subarray:   ``S * (M^2 + 2) - 4`` mults, ``2S - 2`` divs
* closed-form block solution:  2 multiplications
* Gram downdate, per subarray: ``M^2`` multiplications, one division

The leading-order totals ``M^2 * (N*S + K)`` multiplications and ``2*N*S``
divisions are exposed as the analytic model; instrumented executions also
tally the final eigenvector normalisation, so they sit slightly above it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["OpCount", "OpCounter", "analytic_sic_op_count", "ComplexityReport"]


@dataclass(frozen=True)
class OpCount:
    """Totals of complex multiplications and divisions for one execution."""

    complex_mults: int
    complex_divs: int

    def ratio_to(self, other: "OpCount") -> float:
        """Worst-case multiplicative disagreement with ``other`` (>= 1)."""
        ratios = []
        for a, b in (
            (self.complex_mults, other.complex_mults),
            (self.complex_divs, other.complex_divs),
        ):
            if a == 0 and b == 0:
                continue
            if a == 0 or b == 0:
                return float("inf")
            ratios.append(max(a / b, b / a))
        return max(ratios) if ratios else 1.0


@dataclass
class OpCounter:
    """Mutable tally threaded through the precoding kernels."""

    complex_mults: int = 0
    complex_divs: int = 0

    def add(self, mults: int = 0, divs: int = 0) -> None:
        self.complex_mults += int(mults)
        self.complex_divs += int(divs)

    def snapshot(self) -> OpCount:
        return OpCount(self.complex_mults, self.complex_divs)


def analytic_sic_op_count(
    n_subarrays: int, subarray_size: int, n_rx: int, iterations: int
) -> OpCount:
    """Leading-order cost model of the SIC design.

    ``M^2 * (N*S + K)`` complex multiplications and ``2*N*S`` divisions.
    """
    m2 = subarray_size * subarray_size
    return OpCount(
        complex_mults=m2 * (n_subarrays * iterations + n_rx),
        complex_divs=2 * n_subarrays * iterations,
    )


@dataclass(frozen=True)
class ComplexityReport:
    """Instrumented and analytic costs for one configuration."""

    instrumented: OpCount
    analytic: OpCount
    params: dict = field(default_factory=dict)

    @property
    def agreement_factor(self) -> float:
        return self.instrumented.ratio_to(self.analytic)
