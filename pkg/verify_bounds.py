import math
import sys
import logging
from fractions import Fraction

from metric_sparsity.ladders import evaluate_dim_bound
from metric_sparsity.lowerbound import lb_ladder_length
from metric_sparsity.wcol import evaluate_wcol_bound

logger = logging.getLogger(__name__)

# Hand-derived values for the closed-form bounds
EXPECTED = [
    ("thm3(t=2, r=2)", 64, lambda: evaluate_dim_bound("thm3", t=2, r=2)),
    ("lemma4(c=1, x=3)", 900, lambda: evaluate_dim_bound("lemma4", c=1, x=3)),
    ("minor_free(h=2, x=2)", 896, lambda: evaluate_wcol_bound("minor_free", h=2, x=2)),
    ("treewidth(k=1, x=2)", 10, lambda: evaluate_wcol_bound("treewidth", k=1, x=2)),
]


def oracle_values():
    """Recompute each bound from its formula with plain integer arithmetic."""
    # 2^C(t+r, t)
    thm3 = 2 ** math.comb(4, 2)
    # (6c(x+2)^c)^(c+1)
    lemma4 = (6 * 1 * (3 + 2) ** 1) ** 2
    # C(h-2+2*ceil(4hx), h-1) * (12+8x) * (h-1)
    h, x = 2, 2
    minor_free = math.comb(h - 2 + 2 * math.ceil(4 * h * x), h - 1) * (12 + 8 * x) * (h - 1)
    # min(k*2^k*C(k+q, k), (2q+k+1)^(3q+4)) with q = ceil(2x)
    k, q = 1, math.ceil(2 * Fraction(2))
    treewidth = min(k * 2 ** k * math.comb(k + q, k), (2 * q + k + 1) ** (3 * q + 4))
    return [thm3, lemma4, minor_free, treewidth]


def verify_bounds():
    ok = True
    for (name, expected, evaluate), oracle in zip(EXPECTED, oracle_values()):
        value = evaluate()
        if value == expected == oracle:
            logger.info(f"{name} = {value}")
        else:
            logger.error(f"{name}: evaluator {value}, oracle {oracle}, expected {expected}")
            ok = False

    # Ladder lengths multiply across one step of the lower-bound recursion
    for k in range(1, 8):
        for r in range(1, 9 - k):
            lhs = lb_ladder_length(k + 1, r + 1)
            rhs = lb_ladder_length(k + 1, r) * lb_ladder_length(k, r + 1)
            if lhs != rhs:
                logger.error(f"ladder length ({k + 1},{r + 1}) = {lhs}, product {rhs}")
                ok = False
    return ok


if __name__ == "__main__":
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    if verify_bounds():
        logger.info("Verification successful. Bound evaluators agree with the oracle.")
        sys.exit(0)
    else:
        logger.error("Verification failed. Bound evaluators disagree with the oracle.")
    sys.exit(1)
