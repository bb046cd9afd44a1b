"""Reference element catalog command"""
from core.cells import CellShape
from core.refelem import describe, reference_element


def dump_element_command(args) -> int:
    """Print basis functions, quadrature nodes and pressure space of one element"""
    element = reference_element(CellShape(args.shape), args.order)
    print(describe(element))
    return 0
