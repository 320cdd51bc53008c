"""Exception hierarchy shared by all avseq modules."""


class AvseqError(Exception):
    """Base class for all library errors."""


class InputError(AvseqError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class DegeneracyError(AvseqError):
    """Mathematically degenerate configuration (CLI exit code 3)."""


class BudgetError(AvseqError):
    """A configured work budget was exhausted (CLI exit code 4)."""


class InternalInvariantError(AvseqError):
    """An internal cross-check failed; indicates a bug (CLI exit code 5)."""


# -- arithmetic ------------------------------------------------------------

class FactorBudgetExceeded(BudgetError):
    """Factorization ran out of its iteration budget.

    Carries the partially factored state so callers can report progress.
    """

    def __init__(self, n, partial_factors, remaining, budget):
        self.n = n
        self.partial_factors = list(partial_factors)
        self.remaining = remaining
        self.budget = budget
        super().__init__(
            f"factor budget of {budget} rho iterations exhausted on {n}; "
            f"unfactored cofactor {remaining}"
        )


# -- rational curves -------------------------------------------------------

class OffCurve(InputError):
    """A point does not satisfy the curve equation."""


class NonIntegralModel(InputError):
    """Operation requires integral Weierstrass coefficients."""


class TorsionVanish(DegeneracyError):
    """nP is the identity, so the requested denominator is undefined."""


class TorsionInput(InputError):
    """A non-torsion point was required."""


# -- curves over prime fields ----------------------------------------------

class BadReductionPrime(InputError):
    """The prime divides the model discriminant (or is 2)."""


class PrimeTooLarge(InputError):
    """Prime exceeds the configured bound for full-group enumeration."""


class NoQualifyingPrime(DegeneracyError):
    """No auxiliary prime with the required rational torsion was found."""


# -- isogenies ---------------------------------------------------------------

class NotTorsion(InputError):
    """Kernel generators must be torsion points."""


class NotClosed(InputError):
    """Point set is not closed under the group law (or exceeds size bound)."""


class SingularResult(InternalInvariantError):
    """A quotient construction produced a singular curve."""


# -- sequences ---------------------------------------------------------------

class BadModel(InputError):
    """Congruence extraction needs an integral model."""


class TorsionPoint(InputError):
    """The sequence is not defined for a torsion point."""


class TorsionLift(DegeneracyError):
    """nL lies in H exactly; the quotient sequence degenerates."""


# -- pipeline ----------------------------------------------------------------

class GcdNotOne(InputError):
    """Multiplier vector of a decomposition has gcd != 1."""


class DecompositionFailed(DegeneracyError):
    """No rank-one decomposition within the search bound."""


class NoRationalQ0(DegeneracyError):
    """No rational candidate for the quotient point validates."""
