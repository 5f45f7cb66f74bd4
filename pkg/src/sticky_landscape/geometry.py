"""Configuration-space primitives for clusters of unit-diameter spheres.

Configurations are arrays of shape ``(n, 3)``; flat vectors of length ``3n``
are accepted anywhere and reshaped. Bonds are integer arrays of shape
``(m, 2)`` with ``i < j`` in each row. Everything here is a pure function.
"""

import numpy as np

DIAMETER = 1.0
EIG_ZERO = 1e-8
SV_ZERO = 1e-6


class GeometryError(ValueError):
    """Degenerate geometry: coincident particles, collinear clusters."""


class SingularityError(GeometryError):
    """Constraint Jacobian has lower rank than the number of constraints."""


class ProjectionError(RuntimeError):
    """Newton projection onto a constraint manifold did not converge."""


def as_config(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        if x.size % 3:
            raise ValueError("flat configuration length must be a multiple of 3")
        x = x.reshape(-1, 3)
    if x.ndim != 2 or x.shape[1] != 3:
        raise ValueError(f"bad configuration shape {x.shape}")
    return x


def as_bonds(bonds):
    b = np.asarray(bonds, dtype=np.intp).reshape(-1, 2)
    return np.sort(b, axis=1)


def center(x):
    x = as_config(x)
    return x - x.mean(axis=0)


def pair_index(n):
    """All index pairs ``i < j`` in row-major order."""
    i, j = np.triu_indices(n, k=1)
    return np.column_stack([i, j])


def bond_excess(x, bond):
    x = as_config(x)
    i, j = bond
    return float(np.linalg.norm(x[i] - x[j]) - DIAMETER)


def excesses(x, bonds):
    """Excess distances ``|x_i - x_j| - d`` for every row of ``bonds``."""
    x = as_config(x)
    b = as_bonds(bonds)
    return np.linalg.norm(x[b[:, 0]] - x[b[:, 1]], axis=1) - DIAMETER


def constraint_jacobian(x, bonds):
    """Rows are gradients of the bond excesses, shape ``(m, 3n)``."""
    x = as_config(x)
    b = as_bonds(bonds)
    n = len(x)
    d = x[b[:, 1]] - x[b[:, 0]]
    r = np.linalg.norm(d, axis=1)
    if np.any(r < 1e-12):
        raise GeometryError("coincident particles in a bond")
    u = d / r[:, None]
    J = np.zeros((len(b), n, 3))
    rows = np.arange(len(b))
    J[rows, b[:, 0]] = -u
    J[rows, b[:, 1]] = u
    return J.reshape(len(b), 3 * n)


def rigid_body_tangents(x):
    """Orthonormal basis (6, 3n) for infinitesimal translations and rotations."""
    x = as_config(x)
    n = len(x)
    xc = x - x.mean(axis=0)
    vecs = []
    for k in range(3):
        t = np.zeros((n, 3))
        t[:, k] = 1.0
        vecs.append(t.ravel())
    for k in range(3):
        axis = np.zeros(3)
        axis[k] = 1.0
        vecs.append(np.cross(axis, xc).ravel())
    A = np.array(vecs).T
    q, r = np.linalg.qr(A)
    if np.min(np.abs(np.diag(r))) < 1e-8 * max(1.0, np.abs(r).max()):
        raise GeometryError("collinear configuration: rigid-body motions are rank deficient")
    return q.T


def horizontal_basis(x):
    """Orthonormal basis of the complement of the rigid-body motions."""
    x = as_config(x)
    T = rigid_body_tangents(x)
    _, _, vt = np.linalg.svd(T)
    return vt[6:]


def internal_tangents(x, bonds, expected=None):
    """Orthonormal basis (p, 3n) of the null space of the constraint and
    rigid-body rows, i.e. the internal tangent space of the manifold.

    Raises :class:`SingularityError` when the dimension exceeds
    ``3n - 6 - m`` (or ``expected`` when given).
    """
    x = as_config(x)
    b = as_bonds(bonds)
    n = len(x)
    M = np.vstack([constraint_jacobian(x, b), rigid_body_tangents(x)])
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > SV_ZERO))
    dim = 3 * n - rank
    want = 3 * n - 6 - len(b) if expected is None else expected
    if dim > max(want, 0):
        raise SingularityError(
            f"internal tangent space has dimension {dim}, expected {want}"
        )
    return vt[rank:]


def newton_project(x, bonds, tol=1e-12, max_iter=50):
    """Project ``x`` onto ``{y_k = 0}`` along the constraint gradients at ``x``.

    Returns the centred configuration ``x + sum_k lam_k grad y_k(x)``.
    """
    x = as_config(x)
    b = as_bonds(bonds)
    if len(b) == 0:
        return center(x)
    G = constraint_jacobian(x, b)
    x0 = x.ravel()
    lam = np.zeros(len(b))
    for _ in range(max_iter):
        xt = x0 + G.T @ lam
        y = excesses(xt, b)
        if np.max(np.abs(y)) < tol:
            return center(xt)
        A = constraint_jacobian(xt, b) @ G.T
        try:
            lam = lam - np.linalg.solve(A, y)
        except np.linalg.LinAlgError as exc:
            raise ProjectionError("singular Newton system") from exc
        if not np.all(np.isfinite(lam)):
            break
    raise ProjectionError(f"projection did not converge in {max_iter} iterations")


def newton_project_batch(X, bonds, tol=1e-12, max_iter=50):
    """Vectorised :func:`newton_project` over a stack ``X`` of shape (P, n, 3).

    Returns ``(projected, ok)`` where ``ok`` flags converged points;
    unconverged points are returned unchanged.
    """
    X = np.asarray(X, dtype=float)
    b = as_bonds(bonds)
    P, n, _ = X.shape
    if P == 0:
        return X.copy(), np.ones(0, bool)
    G = _batch_jacobian(X, b)                     # (P, m, 3n)
    x0 = X.reshape(P, 3 * n)
    lam = np.zeros((P, len(b)))
    done = np.zeros(P, bool)
    out = X.copy()
    for _ in range(max_iter):
        xt = x0 + np.einsum("pmk,pm->pk", G, lam)
        Xt = xt.reshape(P, n, 3)
        y = np.linalg.norm(Xt[:, b[:, 0]] - Xt[:, b[:, 1]], axis=2) - DIAMETER
        conv = np.max(np.abs(y), axis=1) < tol
        newly = conv & ~done
        out[newly] = Xt[newly]
        done |= conv
        active = ~done & np.all(np.isfinite(lam), axis=1)
        if not active.any():
            break
        A = np.einsum("pmk,plk->pml", _batch_jacobian(Xt[active], b), G[active])
        try:
            step = np.linalg.solve(A, y[active][..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(a, r, rcond=None)[0]
                             for a, r in zip(A, y[active])])
        lam[active] -= step
    out[done] -= out[done].mean(axis=1, keepdims=True)
    return out, done


def _batch_jacobian(X, b):
    P, n, _ = X.shape
    d = X[:, b[:, 1]] - X[:, b[:, 0]]
    u = d / np.linalg.norm(d, axis=2, keepdims=True)
    J = np.zeros((P, len(b), n, 3))
    rows = np.arange(len(b))
    J[:, rows, b[:, 0]] = -u
    J[:, rows, b[:, 1]] = u
    return J.reshape(P, len(b), 3 * n)


def vibrational_factor(x, bonds):
    """Product of ``lambda^{-1/2}`` over the eigenvalues of ``sum grad y grad y^T``."""
    J = constraint_jacobian(x, bonds)
    lam = np.linalg.eigvalsh(J @ J.T)
    if np.any(lam <= EIG_ZERO):
        raise SingularityError(
            f"{int(np.sum(lam <= EIG_ZERO))} constraint eigenvalues below {EIG_ZERO}"
        )
    return float(np.exp(-0.5 * np.sum(np.log(lam))))


def vibrational_factor_batch(X, bonds):
    b = as_bonds(bonds)
    J = _batch_jacobian(np.asarray(X, float), b)
    lam = np.linalg.eigvalsh(np.einsum("pik,pjk->pij", J, J))
    return np.exp(-0.5 * np.sum(np.log(np.clip(lam, EIG_ZERO, None)), axis=1))


def inertia_tensor(x):
    x = center(x)
    r2 = np.sum(x * x)
    return r2 * np.eye(3) - x.T @ x


def rotational_factor(x):
    """Square root of the determinant of the (unit-mass) inertia tensor."""
    det = np.linalg.det(inertia_tensor(x))
    if det <= 1e-14:
        raise GeometryError("collinear cluster: inertia tensor is singular")
    return float(np.sqrt(det))


def rotational_factor_batch(X):
    X = np.asarray(X, float)
    Xc = X - X.mean(axis=1, keepdims=True)
    r2 = np.einsum("pij,pij->p", Xc, Xc)
    T = r2[:, None, None] * np.eye(3) - np.einsum("pia,pib->pab", Xc, Xc)
    return np.sqrt(np.clip(np.linalg.det(T), 0.0, None))


def bond_embedding(x):
    """All pairwise distances, the point of bond-distance space for ``x``."""
    x = as_config(x)
    p = pair_index(len(x))
    return np.linalg.norm(x[p[:, 0]] - x[p[:, 1]], axis=1)


def bond_embedding_batch(X):
    X = np.asarray(X, float)
    p = pair_index(X.shape[1])
    return np.linalg.norm(X[:, p[:, 0]] - X[:, p[:, 1]], axis=2)


def quotient_tangents(x, bonds=None):
    """Push orthonormal horizontal tangents forward to bond-distance space.

    With ``bonds`` the tangents span the internal tangent space of that
    constraint manifold; without, the full horizontal space is used.
    Returns an array of shape ``(n(n-1)/2, p)`` whose columns have unit
    length in the quotient metric.
    """
    x = as_config(x)
    basis = horizontal_basis(x) if bonds is None else internal_tangents(x, bonds)
    return constraint_jacobian(x, pair_index(len(x))) @ basis.T


def _projected_length(T, v):
    c, *_ = np.linalg.lstsq(T, v, rcond=None)
    return float(np.linalg.norm(c))


def quotient_distance(x1, x2, bonds=None):
    """First-order distance between two nearby points of the quotient space.

    The bond-distance separation is expressed in the quotient tangent
    frame at each end; the two lengths are averaged.
    """
    v = bond_embedding(x2) - bond_embedding(x1)
    d1 = _projected_length(quotient_tangents(x1, bonds), v)
    d2 = _projected_length(quotient_tangents(x2, bonds), v)
    return 0.5 * (d1 + d2)


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    a, b, c, d = q
    return np.array([
        [a*a + b*b - c*c - d*d, 2*(b*c - a*d), 2*(b*d + a*c)],
        [2*(b*c + a*d), a*a - b*b + c*c - d*d, 2*(c*d - a*b)],
        [2*(b*d - a*c), 2*(c*d + a*b), a*a - b*b - c*c + d*d],
    ])


def rigid_body_tangents_batch(X):
    X = np.asarray(X, float)
    P, n, _ = X.shape
    Xc = X - X.mean(axis=1, keepdims=True)
    A = np.zeros((P, 6, n, 3))
    for k in range(3):
        A[:, k, :, k] = 1.0
        axis = np.zeros(3)
        axis[k] = 1.0
        A[:, 3 + k] = np.cross(axis, Xc)
    q, _ = np.linalg.qr(np.swapaxes(A.reshape(P, 6, 3 * n), 1, 2))
    return np.swapaxes(q, 1, 2)


def internal_tangents_batch(X, bonds):
    """Stacked internal tangent bases, shape (P, 3n-6-m, 3n); assumes every
    point is regular."""
    X = np.asarray(X, float)
    b = as_bonds(bonds)
    P, n, _ = X.shape
    M = np.concatenate([_batch_jacobian(X, b), rigid_body_tangents_batch(X)], axis=1)
    _, _, vt = np.linalg.svd(M)
    return vt[:, len(b) + 6:]


def quotient_tangents_batch(X, bonds):
    """Stacked bond-space pushforwards of internal tangents, (P, nb, p)."""
    X = np.asarray(X, float)
    t = internal_tangents_batch(X, bonds)
    J = _batch_jacobian(X, pair_index(X.shape[1]))
    return np.einsum("pbk,pjk->pbj", J, t)


def excesses_batch(X, bonds):
    X = np.asarray(X, dtype=float)
    b = as_bonds(bonds)
    return np.linalg.norm(X[:, b[:, 1]] - X[:, b[:, 0]], axis=2) - DIAMETER
