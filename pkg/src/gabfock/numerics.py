"""Small shared numerical helpers: compensated sums and log-product
accumulation over large zero sets.

Long sums of near-cancelling or widely scaled terms appear all over the
package (lattice sums, planar quadratures, log-magnitudes of products
over thousands of zeros).  Everything here is deterministic: terms are
consumed in the order given.
"""

import numpy as np

# Products over zero sets are evaluated in blocks this size; the block
# product stays in a safe floating-point range (magnitudes per factor
# are at most ~1e2 in all callers) and one log per block keeps the cost
# of the transcendental down.
LOG_BLOCK = 16


def kahan_sum(values):
    """Compensated (Kahan) sum of a 1-D array, in array order."""
    s = 0.0
    c = 0.0
    for v in np.asarray(values, dtype=float):
        y = v - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


class KahanAccumulator:
    """Streaming compensated sum; add scalars or reduce arrays in order.

    Array chunks are first reduced pairwise (which is already accurate)
    and then folded into the compensated scalar state, so feeding many
    chunks keeps the global error at a few ulp.
    """

    def __init__(self):
        self.total = 0.0
        self._c = 0.0

    def add(self, value):
        y = float(value) - self._c
        t = self.total + y
        self._c = (t - self.total) - y
        self.total = t

    def add_array(self, values):
        # np.add.reduce uses pairwise summation on float arrays
        self.add(np.add.reduce(np.asarray(values, dtype=float)))


def kahan_add_vec(state_s, state_c, terms):
    """One compensated-summation step applied elementwise.

    state_s, state_c and terms are arrays of the same shape; the state
    arrays are updated in place.  Entries of terms equal to -inf make
    the corresponding lane -inf permanently (the caller handles the
    sticky mask; here we just avoid poisoning the compensation with
    inf - inf = nan).
    """
    neg = np.isneginf(terms)
    if neg.any():
        terms = np.where(neg, 0.0, terms)
    y = terms - state_c
    t = state_s + y
    state_c[...] = (t - state_s) - y
    state_s[...] = t
    return neg


def product_logabs(points, factors_for_block, n_blocks):
    """Accumulate sum of log|f_j(z)| over j for each z in points.

    factors_for_block(k, points) must return the complex product of the
    k-th block of factors evaluated at points (at most LOG_BLOCK factors
    per block, so no overflow).  Returns an array of log-magnitudes with
    exact -inf where any factor vanished.
    """
    s = np.zeros(points.shape, dtype=float)
    c = np.zeros(points.shape, dtype=float)
    dead = np.zeros(points.shape, dtype=bool)
    for k in range(n_blocks):
        prod = factors_for_block(k, points)
        mag2 = prod.real * prod.real + prod.imag * prod.imag
        with np.errstate(divide="ignore"):
            term = 0.5 * np.log(mag2)
        dead |= kahan_add_vec(s, c, term)
    s[dead] = -np.inf
    return s
