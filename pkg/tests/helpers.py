"""Small problem builders shared by the tests."""

from photokin.model import FunctionSpec, ProblemSpec, validate_problem


def flat_problem(f=1.0, T=1.0, I=1.0, mu=0.1, c0=1.0, L=1.0):
    """No absorption, constant lamp: the wavelength integral of rho is rho(I)."""
    const = FunctionSpec.builtin
    spec = ProblemSpec(
        L=L,
        T=T,
        lambda0=0.0,
        lambda_star=1.0,
        a1=1.0,
        a2=1.0,
        mu=mu,
        c0=const("constant", c0),
        C0=const("polynomial", 0.0, c0),
        f=const("constant", f),
        I=const("constant", I),
        epsA=const("constant", 0.0),
        epsB=const("constant", 0.0),
    )
    return validate_problem(spec)
