"""Bounded families of finitely connected pointed domains, made computable."""

__version__ = "0.1.0"
