"""Gap probabilities of the Airy and Pearcey processes via block Fredholm
determinants, plus the verification studies built on top of them."""

__version__ = "0.1.0"
