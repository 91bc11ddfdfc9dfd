"""Pure NumPy implementations of the hot kernels.

These are the reference versions; ``_kernels.pyx`` must agree with them to
round-off. All entropies here are in nats.
"""
import numpy as np

_EIG_FLOOR = 1e-12


def _xlogx_sum(lam):
    lam = np.where(lam > _EIG_FLOOR, lam, 1.0)
    return np.sum(lam * np.log(lam), axis=-1)


def qubit_conditional_entropies(blocks, thetas, phis):
    """Average conditional entropy after a projective measurement on a qubit.

    ``blocks[a, b]`` is the operator ``<a|rho|b>`` acting on the unmeasured
    side (shape ``(2, 2, d, d)``). For each Bloch direction ``(theta, phi)``
    the measured basis is ``{|n>, |n_perp>}`` with
    ``|n> = cos(theta/2)|0> + exp(i phi) sin(theta/2)|1>``.
    Returns ``sum_k p_k H(rho_k)`` for every direction.
    """
    blocks = np.asarray(blocks, dtype=np.complex128)
    thetas = np.asarray(thetas, dtype=np.float64)
    phis = np.asarray(phis, dtype=np.float64)
    c = np.cos(thetas / 2)[:, None, None]
    s = np.sin(thetas / 2)[:, None, None]
    e = np.exp(1j * phis)[:, None, None]
    b00, b01, b10, b11 = blocks[0, 0], blocks[0, 1], blocks[1, 0], blocks[1, 1]
    m_plus = c * c * b00 + s * s * b11 + c * s * e * b01 + c * s * np.conj(e) * b10
    m_minus = (b00 + b11)[None] - m_plus
    out = np.zeros(thetas.shape[0])
    for m in (m_plus, m_minus):
        lam = np.linalg.eigvalsh(m)
        p = np.clip(np.sum(lam, axis=-1), 0.0, None)
        out += np.where(p > _EIG_FLOOR, -_xlogx_sum(lam) + p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return out


def masked_products(values, masks):
    """Row-wise product of ``values`` over the entries selected by ``masks``."""
    values = np.asarray(values, dtype=np.complex128)
    masks = np.asarray(masks, dtype=bool)
    return np.prod(np.where(masks, values[None, :], 1.0), axis=1)


def _rank2_entropy(weight_product, coherence):
    # eigenvalues of [[p, x], [x*, q]] with pq = weight_product, |x|^2 = pq |c|^2
    disc = np.sqrt(np.clip(1.0 - 4.0 * weight_product * (1.0 - np.abs(coherence) ** 2), 0.0, 1.0))
    lam = np.stack([(1 + disc) / 2, (1 - disc) / 2], axis=-1)
    return -_xlogx_sum(lam)


def branch_mutual_information(overlaps, masks, pa, pb):
    """I(S:F) in nats for a two-branch state, one fragment per mask row.

    ``overlaps[k] = <e_k^1|e_k^0>``; ``pa``, ``pb`` are the branch weights.
    Uses the rank-2 closed forms: H(S) from the product over all spins,
    H(F) from the product over F and H(SF) from the product over E \\ F.
    """
    overlaps = np.asarray(overlaps, dtype=np.complex128)
    masks = np.asarray(masks, dtype=bool)
    wp = pa * pb
    h_s = _rank2_entropy(wp, np.prod(overlaps))
    inside = np.prod(np.where(masks, overlaps[None, :], 1.0), axis=1)
    outside = np.prod(np.where(masks, 1.0, overlaps[None, :]), axis=1)
    return h_s + _rank2_entropy(wp, inside) - _rank2_entropy(wp, outside)
