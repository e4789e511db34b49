from .ami import to_ami
from .builder import GadgetCertificationError, PassError, PassReport, TowerMode
from .compact import compactify, paper_tower_height
from .conj import to_conj
from .inv import to_inv
from .shift import to_shift
from .small import to_small
from .square import to_square

__all__ = [
    "GadgetCertificationError",
    "PassError",
    "PassReport",
    "TowerMode",
    "compactify",
    "paper_tower_height",
    "to_ami",
    "to_conj",
    "to_inv",
    "to_shift",
    "to_small",
    "to_square",
]
