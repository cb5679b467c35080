"""Truncated Fourier loops and the action functional on them.

A loop is ``x(t) = sum_k exp(2 pi k J t) x_k`` with ``J = -J0``, i.e.
``J(q, p) = (p, -q)``.  In complex coordinates ``z = q + i p`` this reads
``z(t) = sum_k exp(-2 pi i k t) w_k``, so positive modes turn clockwise and
the quadratic part of the action is

    a(x) = pi sum_{k>0} k |x_k|^2 - pi sum_{k<0} |k| |x_k|^2
         = 1/2 ||x+||^2 - 1/2 ||x-||^2,

which equals minus the symplectic area of a capping disc.  The H^{1/2}
inner product is ``<x, y> = x_0 . y_0 + 2 pi sum |k| x_k . y_k``.
"""

import numpy as np

from ._validation import check_points
from .exceptions import ConvergenceError, InputError


class FourierLoop:
    """Loop in R^2n stored by its modes ``x_k``, ``|k| <= kmax``.

    Parameters
    ----------
    coeffs : array_like, shape (2 kmax + 1, 2n)
        Row ``k + kmax`` holds ``x_k``.
    """

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=float)
        if c.ndim != 2 or c.shape[0] % 2 == 0 or c.shape[1] % 2:
            raise InputError("coefficients must have shape (2 kmax + 1, 2n)")
        if not np.all(np.isfinite(c)):
            raise InputError("coefficients must be finite")
        self.coeffs = c

    # construction -----------------------------------------------------
    @classmethod
    def zeros(cls, dim, kmax=64):
        return cls(np.zeros((2 * kmax + 1, dim)))

    @classmethod
    def constant(cls, c, kmax=64):
        c = np.asarray(c, dtype=float)
        out = np.zeros((2 * kmax + 1, c.size))
        out[kmax] = c
        return cls(out)

    @classmethod
    def single_mode(cls, k, v, kmax=64):
        v = np.asarray(v, dtype=float)
        if abs(k) > kmax:
            raise InputError("mode outside the truncation")
        out = np.zeros((2 * kmax + 1, v.size))
        out[k + kmax] = v
        return cls(out)

    @classmethod
    def random(cls, dim, kmax=8, rng=None, decay=1.0):
        rng = np.random.default_rng(rng)
        k = np.arange(-kmax, kmax + 1)
        amp = 1.0 / (1.0 + np.abs(k)) ** (1.0 + decay)
        return cls(rng.standard_normal((2 * kmax + 1, dim)) * amp[:, None])

    @classmethod
    def from_samples(cls, X, kmax=None):
        """Modes of the loop through equispaced samples ``X[j] = x(j / N)``."""
        X, _ = check_points(X)
        N, d = X.shape
        kmax = (N - 1) // 2 if kmax is None else int(kmax)
        if 2 * kmax + 1 > N:
            raise InputError("need at least 2 kmax + 1 samples")
        n = d // 2
        z = X[:, :n] + 1j * X[:, n:]
        W = np.fft.ifft(z, axis=0)
        k = np.arange(-kmax, kmax + 1)
        w = W[k % N]
        return cls(np.concatenate([w.real, w.imag], axis=1))

    # basic properties -------------------------------------------------
    @property
    def kmax(self):
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def dim(self):
        return self.coeffs.shape[1]

    @property
    def modes(self):
        return np.arange(-self.kmax, self.kmax + 1)

    def mode(self, k):
        if abs(k) > self.kmax:
            return np.zeros(self.dim)
        return self.coeffs[k + self.kmax].copy()

    def padded(self, kmax):
        if kmax == self.kmax:
            return self
        out = np.zeros((2 * kmax + 1, self.dim))
        m = min(kmax, self.kmax)
        out[kmax - m:kmax + m + 1] = self.coeffs[self.kmax - m:self.kmax + m + 1]
        return FourierLoop(out)

    def _complex(self):
        n = self.dim // 2
        return self.coeffs[:, :n] + 1j * self.coeffs[:, n:]

    # synthesis --------------------------------------------------------
    def samples(self, n_nodes=None):
        """Values at ``t_j = j / N``; default ``N = 4 kmax`` (at least ``2 kmax + 2``)."""
        N = self.default_nodes() if n_nodes is None else int(n_nodes)
        if N <= 2 * self.kmax:
            raise InputError("too few nodes for the truncation")
        A = np.zeros((N, self.dim // 2), dtype=complex)
        A[self.modes % N] = self._complex()
        z = np.fft.fft(A, axis=0)
        return np.concatenate([z.real, z.imag], axis=1)

    def default_nodes(self):
        return max(4 * self.kmax, 2 * self.kmax + 2, 8)

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        E = np.exp(-2j * np.pi * np.outer(t, self.modes))
        z = E @ self._complex()
        return np.concatenate([z.real, z.imag], axis=1)

    def derivative(self, t=None, n_nodes=None):
        """``x'(t)``; at the nodes when ``t`` is omitted."""
        d = FourierLoop(self._scaled_rotated())
        return d.samples(n_nodes) if t is None else d(t)

    def _scaled_rotated(self):
        # d/dt exp(2 pi k J t) x_k = exp(2 pi k J t) (2 pi k J x_k),  J(q, p) = (p, -q)
        n = self.dim // 2
        c = self.coeffs
        Jc = np.concatenate([c[:, n:], -c[:, :n]], axis=1)
        return 2 * np.pi * self.modes[:, None] * Jc

    # algebra ----------------------------------------------------------
    def _aligned(self, other):
        if self.dim != other.dim:
            raise InputError("loop dimension mismatch")
        m = max(self.kmax, other.kmax)
        return self.padded(m).coeffs, other.padded(m).coeffs

    def __add__(self, other):
        a, b = self._aligned(other)
        return FourierLoop(a + b)

    def __sub__(self, other):
        a, b = self._aligned(other)
        return FourierLoop(a - b)

    def __mul__(self, c):
        return FourierLoop(float(c) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self):
        return FourierLoop(-self.coeffs)

    def shifted(self, dt):
        """Time shift ``t -> x(t + dt)``."""
        n = self.dim // 2
        w = self._complex() * np.exp(-2j * np.pi * self.modes * dt)[:, None]
        return FourierLoop(np.concatenate([w.real, w.imag], axis=1))

    def to_csv(self, path=None, header=""):
        n = self.dim // 2
        cols = ["k"] + [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
        lines = [header.rstrip("\n")] if header else []
        lines.append(",".join(cols))
        for k, row in zip(self.modes, self.coeffs):
            lines.append(",".join([str(int(k))] + [f"{v:.16e}" for v in row]))
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def __repr__(self):
        return f"FourierLoop(dim={self.dim}, kmax={self.kmax})"


def h12_weights(kmax):
    k = np.arange(-kmax, kmax + 1)
    w = 2 * np.pi * np.abs(k).astype(float)
    w[kmax] = 1.0
    return w


def h12_inner(x, y):
    """``<x, y> = x_0 . y_0 + 2 pi sum_k |k| x_k . y_k``."""
    a, b = x._aligned(y)
    w = h12_weights((a.shape[0] - 1) // 2)
    return float(np.sum(w * np.einsum("kd,kd->k", a, b)))


def h12_norm(x):
    return float(np.sqrt(max(h12_inner(x, x), 0.0)))


def split(x):
    """``(x-, x0, x+)``: negative, zero and positive modes."""
    k = x.modes[:, None]
    return (FourierLoop(np.where(k < 0, x.coeffs, 0.0)),
            FourierLoop(np.where(k == 0, x.coeffs, 0.0)),
            FourierLoop(np.where(k > 0, x.coeffs, 0.0)))


def quadratic_action(x):
    """``a(x) = 1/2 ||x+||^2 - 1/2 ||x-||^2``, minus the capping-disc area."""
    k = x.modes
    sq = np.einsum("kd,kd->k", x.coeffs, x.coeffs)
    return float(np.pi * np.sum(k * sq))


def hamiltonian_term(H, x, n_nodes=None):
    """``b(x) = int_0^1 H(t, x(t)) dt`` by the trapezoidal rule on the nodes."""
    N = x.default_nodes() if n_nodes is None else int(n_nodes)
    X = x.samples(N)
    t = np.arange(N) / N
    if H.autonomous:
        return float(np.mean(H._value(0.0, X)))
    return float(np.mean([H._value(tj, X[j:j + 1])[0] for j, tj in enumerate(t)]))


def action(H, x, n_nodes=None, check=False, tol=1e-10):
    """``A_H(x) = a(x) + b(x)``.

    With ``check=True`` the quadrature is repeated on twice as many nodes
    and a :class:`ConvergenceError` is raised if the two disagree by more
    than ``tol``.
    """
    N = x.default_nodes() if n_nodes is None else int(n_nodes)
    b = hamiltonian_term(H, x, N)
    if check:
        b2 = hamiltonian_term(H, x, 2 * N)
        if abs(b2 - b) > tol * (1 + abs(b)):
            raise ConvergenceError("action quadrature not converged", best=quadratic_action(x) + b2)
    return quadratic_action(x) + b


def _node_gradients(H, X, t):
    if H.autonomous:
        return H._gradient(0.0, X)
    return np.vstack([H._gradient(tj, X[j:j + 1]) for j, tj in enumerate(t)])


def l2_modes(G, kmax):
    """Modes of sampled values ``G`` (N, 2n) in the ``exp(2 pi k J t)`` basis."""
    N = G.shape[0]
    n = G.shape[1] // 2
    W = np.fft.ifft(G[:, :n] + 1j * G[:, n:], axis=0)
    w = W[np.arange(-kmax, kmax + 1) % N]
    return np.concatenate([w.real, w.imag], axis=1)


def gradient(H, x, n_nodes=None):
    """H^{1/2} gradient ``x+ - x- + grad b(x)``.

    ``grad b`` is the pointwise gradient ``t -> grad H(t, x(t))`` expanded in
    the loop basis, with mode k divided by ``2 pi |k|`` (mode 0 unchanged).
    """
    N = x.default_nodes() if n_nodes is None else int(n_nodes)
    X = x.samples(N)
    G = _node_gradients(H, X, np.arange(N) / N)
    g = l2_modes(G, x.kmax)
    w = h12_weights(x.kmax)
    k = x.modes[:, None]
    quad = np.sign(k) * x.coeffs
    return FourierLoop(quad + g / w[:, None])


def loop_residual(H, x, n_nodes=None):
    """``x'(t_j) - X_H(t_j, x(t_j))`` at the nodes."""
    N = x.default_nodes() if n_nodes is None else int(n_nodes)
    X = x.samples(N)
    t = np.arange(N) / N
    if H.autonomous:
        V = H._vector_field(0.0, X)
    else:
        V = np.vstack([H._vector_field(tj, X[j:j + 1]) for j, tj in enumerate(t)])
    return x.derivative(n_nodes=N) - V


def graph_to_cotangent(q, p, Q, P):
    """``(q, p, Q, P) -> (((q + Q)/2, (p + P)/2), (p - P, Q - q))``.

    Sends the graph of a symplectic map of R^2n (with ``-omega0 + omega0``)
    to T^*R^2n over the diagonal, fixed points landing on the zero section.
    """
    q, p, Q, P = (np.asarray(a, dtype=float) for a in (q, p, Q, P))
    base = np.concatenate([(q + Q) / 2, (p + P) / 2], axis=-1)
    fiber = np.concatenate([p - P, Q - q], axis=-1)
    return base, fiber


def quadrature_action(H, t, w, X, Xdot):
    """Action of a loop given by values and velocities at quadrature nodes.

    ``a = -1/2 int omega0(x - c, x')`` is the area of the cone from the mean
    point ``c`` (any cap gives the same value on R^2n); ``b = int H``.
    Suitable for loops that are smooth only between time break points.
    """
    from .flows import omega0

    t = np.asarray(t, dtype=float)
    w = np.asarray(w, dtype=float)
    c = w @ X / w.sum()
    a = -0.5 * float(w @ omega0(X - c, Xdot))
    if H.autonomous:
        hv = H._value(0.0, X)
    else:
        hv = np.array([H._value(tj, X[j:j + 1])[0] for j, tj in enumerate(t)])
    return a + float(w @ hv)


def gauss_nodes(breakpoints=(), order=48):
    """Composite Gauss-Legendre nodes on [0, 1] split at ``breakpoints``."""
    cuts = np.unique(np.concatenate([[0.0, 1.0], np.clip(np.asarray(breakpoints, dtype=float), 0, 1)]))
    x, w = np.polynomial.legendre.leggauss(order)
    ts, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        ts.append(0.5 * (b - a) * x + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * w)
    return np.concatenate(ts), np.concatenate(ws)
