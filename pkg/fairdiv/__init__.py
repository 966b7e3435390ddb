"""fairdiv · fair allocation solvers (EF1+PO chores, MMS, MMS+PO) and brute-force checkers."""

from fairdiv.core import (Allocation, ClassTag, FairDivError, Instance, Kind, classify,
                          parse_allocation, parse_instance)
from fairdiv.fairness import is_ef, is_ef1, is_mms_alloc, is_pef1
from fairdiv.fisher import solve_ef1_po, solve_ef1_po_with_zeros
from fairdiv.mms import mms_value_factored, solve_mms
from fairdiv.oracle import exact_mms, is_po_bruteforce
from fairdiv.pareto import find_pareto_improvement, pareto_chain, po_by_cycles, solve_mms_po
