"""Exception types shared across the package."""


class HillgapsError(Exception):
    """Base class for all package errors."""


class InputError(HillgapsError):
    """Invalid user input: bad files, bad parameters, violated preconditions."""


class InterlacingError(HillgapsError):
    """Computed band edges violate the interlacing ordering.

    Usually signals insufficient truncation or integration resolution.
    """

    def __init__(self, n: int, detail: str):
        self.n = n
        super().__init__(f"interlacing violated at n={n}: {detail}")


class IntegrationError(HillgapsError):
    """The ODE integrator failed its accuracy witness after all retries."""


class BracketError(HillgapsError):
    """A root bracket could not be established within the search budget."""
