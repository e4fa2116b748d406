"""Independent reference implementations used as test oracles.

Nothing here imports the package's numerical kernels: determinants come
from ``numpy.linalg.eigvalsh``, the eigen-oracle is a textbook real Jacobi
on the ``2n x 2n`` real embedding, and selection is brute force.
"""

import itertools

import numpy as np


def real_embedding(a):
    a = np.asarray(a, dtype=complex)
    return np.block([[a.real, -a.imag], [a.imag, a.real]])


def jacobi_eigenvalues(a, sweeps=60):
    """Eigenvalues of a Hermitian matrix via classical Jacobi on its real embedding.

    Each eigenvalue of ``a`` appears twice in the embedding; every other
    value of the sorted spectrum is returned.
    """
    m = real_embedding(a).copy()
    n = m.shape[0]
    for _ in range(sweeps):
        off = np.sqrt(np.sum(m**2) - np.sum(np.diag(m) ** 2))
        if off < 1e-14 * np.linalg.norm(m):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(m[p, q]) < 1e-300:
                    continue
                theta = 0.5 * np.arctan2(2 * m[p, q], m[q, q] - m[p, p])
                c, s = np.cos(theta), np.sin(theta)
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q], rot[q, p] = s, -s
                m = rot.T @ m @ rot
    w = np.sort(np.diag(m))[::-1]
    return w[::2]


def log2det(m):
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return float(np.sum(np.log2(w)))


def comm_bits(h, gamma, T):
    h = np.asarray(h, dtype=complex)
    if h.size == 0:
        return 0.0
    return T * log2det(np.eye(h.shape[0]) + gamma * h @ h.conj().T)


def sense_bits(r_stack, gamma, T):
    return sum(log2det(np.eye(r.shape[0]) + gamma * T * r) for r in r_stack)


def objective(h, r, gamma, T, omega_c, n_s, idx):
    idx = list(idx)
    ic = comm_bits(h[:, idx], gamma, T)
    is_ = sense_bits([rn[np.ix_(idx, idx)] for rn in r], gamma, T)
    return omega_c * ic / T + (1 - omega_c) * is_ / n_s


def naive_greedy(h, r, gamma, T, omega_c, n_s, k):
    """Backward greedy with every candidate removal re-evaluated from scratch."""
    rem = list(range(h.shape[1]))
    while len(rem) > k:
        vals = [objective(h, r, gamma, T, omega_c, n_s, [c for c in rem if c != j]) for j in rem]
        rem.pop(int(np.argmax(vals)))
    return rem


def brute_force(h, r, gamma, T, omega_c, n_s, k):
    """Best ``k``-subset by enumeration, first maximiser in lexicographic order."""
    best, best_val = None, -np.inf
    for combo in itertools.combinations(range(h.shape[1]), k):
        v = objective(h, r, gamma, T, omega_c, n_s, combo)
        if v > best_val:
            best, best_val = list(combo), v
    return best, best_val


def random_hermitian(rng, n, scale=1.0):
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (x + x.conj().T) / 2


def random_pd(rng, n, ridge=1.0):
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return x @ x.conj().T + ridge * np.eye(n)


def random_psd_stack(rng, count, n, rank):
    out = []
    for _ in range(count):
        g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
        out.append(g @ g.conj().T / n)
    return np.array(out)
