"""Small named actions used by the tests, demos and the shipped corpus."""
from .algebra import MatrixBlockAlgebra
from .crossed import FiniteGroup, GroupAction


def z2_swap():
    """``Z_2`` swapping the two points of ``C^2``."""
    return GroupAction.translation(FiniteGroup.cyclic(2))


def trivial_z2(label="C^2"):
    return GroupAction.trivial(FiniteGroup.cyclic(2), MatrixBlockAlgebra.from_label(label))


def cyclic_translation(n):
    return GroupAction.translation(FiniteGroup.cyclic(n))


def s3_translation():
    return GroupAction.translation(FiniteGroup.symmetric(3))


def trivial_group_action(label):
    return GroupAction.trivial(FiniteGroup.cyclic(1), MatrixBlockAlgebra.from_label(label))


NAMED_ACTIONS = {
    "z2_swap": z2_swap,
    "z2_trivial": trivial_z2,
    "z3_translation": lambda: cyclic_translation(3),
    "z4_translation": lambda: cyclic_translation(4),
    "s3_translation": s3_translation,
}
