"""lietop: exact-arithmetic engine for completed free graded Lie algebras.

Builds dgl models of cell attachments, computes homology on nilpotent
truncations, and decides/certifies rational inertness of attaching maps.
"""

from .freelie import (
    Generator,
    LieElement,
    TensorElement,
    Window,
    ad_power,
    bch,
    bracket,
    certify_lie,
    exp,
    lie_basis,
    log,
    log_group_word,
)
from .dgl import DglPresentation, HomologyTable
from .attach import (
    AttachingMap,
    InertnessVerdict,
    attach_cells,
    inert_anick,
    inert_homological,
    quotient_consistency,
    sequential_attach,
)
from .sullivan import NilpotentLieData, SullivanData, cochains, homotopy_lie

__all__ = [
    "Generator", "LieElement", "TensorElement", "Window",
    "ad_power", "bch", "bracket", "certify_lie", "exp", "lie_basis",
    "log", "log_group_word",
    "DglPresentation", "HomologyTable",
    "AttachingMap", "InertnessVerdict", "attach_cells", "inert_anick",
    "inert_homological", "quotient_consistency", "sequential_attach",
    "NilpotentLieData", "SullivanData", "cochains", "homotopy_lie",
]
