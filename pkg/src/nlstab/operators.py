"""Discretized linear operators of the stability machinery.

All operators act on stacked pair fields (component 1 first) with
second-order stencils.  On truncated grids the perturbation is extended
by zero outside the domain, which keeps every symmetric kind exactly
symmetric; on periodic grids stencils wrap around.

Kinds
-----
``Lc``/``Lc1d``  second variation of the energy-momentum functional at a
    wave U = u1 + i*u2, blocks
    [-Lap - F - 2F'u1^2,  -c d1 - 2F'u1u2 ;  c d1 - 2F'u1u2,  -Lap - F - 2F'u2^2].
``LcInfty``      its constant-coefficient far-field form.
``Mc``           second variation in density/phase variables (rho, theta),
    blocks M11 = -div(grad/(2rho)) - |grad rho|^2/(2rho^3)
    + Lap(rho)/(2rho^2) - F'(rho), M22 = -2 div(rho grad),
    M21 = c d1 - 2 div(grad(theta) .), M12 = M21^T.
``McInfty``      far-field form with M11 replaced by -div(grad/(2rho)) + 1/rho.
``M0``           Mc of a stationary bubble (c = 0, theta = 0); block diagonal.
``A``            scalar linearization -Lap - F(phi^2) - 2F'(phi^2) phi^2 of the
    steady equation at a bubble amplitude phi.
``LcPlusK2``     Lc shifted by k^2 (transverse wave number k).
"""

import numpy as np
import scipy.io
import scipy.sparse as sp

from .grid import PairField, ScalarField, chi_multiplier_array, diff, gradient

SYMMETRIC_KINDS = ("Lc", "Lc1d", "LcInfty", "Mc", "McInfty", "M0", "A", "LcPlusK2")


# ---------------------------------------------------------------------------
# 1D sparse stencil factories (zero extension or wraparound at the edges)

def _partial_1d(n, h, periodic):
    e = np.ones(n) / (2.0 * h)
    mat = sp.diags([e[:-1], -e[:-1]], [1, -1], shape=(n, n), format="lil")
    if periodic:
        mat[0, n - 1] = -1.0 / (2.0 * h)
        mat[n - 1, 0] = 1.0 / (2.0 * h)
    return mat.tocsr()


def _div_coeff_grad_1d(coeff, h, periodic):
    """Symmetric three-point form of -d/dx (a(x) d/dx) with face averages."""
    n = coeff.shape[0]
    face = 0.5 * (coeff[:-1] + coeff[1:])  # interior faces i+1/2
    if periodic:
        wrap = 0.5 * (coeff[-1] + coeff[0])
        diag = np.empty(n)
        diag[0] = face[0] + wrap
        diag[-1] = face[-1] + wrap
        diag[1:-1] = face[:-1] + face[1:]
        mat = sp.diags([diag / h ** 2, -face / h ** 2, -face / h ** 2],
                       [0, 1, -1], format="lil")
        mat[0, n - 1] = -wrap / h ** 2
        mat[n - 1, 0] = -wrap / h ** 2
        return mat.tocsr()
    # zero extension: edge faces take the constant-extrapolated coefficient
    diag = np.empty(n)
    diag[0] = face[0] + coeff[0]
    diag[-1] = face[-1] + coeff[-1]
    diag[1:-1] = face[:-1] + face[1:]
    return sp.diags([diag / h ** 2, -face / h ** 2, -face / h ** 2],
                    [0, 1, -1], format="csr")


def _eye(n):
    return sp.identity(n, format="csr")


def _axis_operator(grid, axis, builder, *args):
    """Lift a 1D stencil along one axis of a (possibly 2D) grid."""
    mats = []
    for a in range(grid.dim):
        if a == axis:
            mats.append(builder(a, *args))
        else:
            mats.append(_eye(grid.n[a]))
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


def partial_matrix(grid, axis):
    periodic = grid.boundary == "periodic"
    return _axis_operator(grid, axis,
                          lambda a: _partial_1d(grid.n[a], grid.h[a], periodic))


def neg_laplacian_matrix(grid):
    return div_coeff_grad_matrix(grid, np.ones(grid.shape))


def div_coeff_grad_matrix(grid, coeff):
    """Matrix of -div(a grad .) built axis by axis with face-averaged a."""
    periodic = grid.boundary == "periodic"
    coeff = np.asarray(coeff, dtype=float)
    total = None
    for axis in range(grid.dim):
        rolled = np.moveaxis(coeff, axis, 0)
        n = grid.n[axis]
        h = grid.h[axis]
        if grid.dim == 1:
            mat = _div_coeff_grad_1d(rolled, h, periodic)
        else:
            # build per-line tridiagonal blocks, then assemble as block diag
            other = rolled.shape[1]
            rows, cols, vals = [], [], []
            face = 0.5 * (rolled[:-1, :] + rolled[1:, :])
            idx = np.arange(n)
            for j in range(other):
                f = face[:, j]
                diag = np.empty(n)
                if periodic:
                    wrap = 0.5 * (rolled[-1, j] + rolled[0, j])
                    diag[0] = f[0] + wrap
                    diag[-1] = f[-1] + wrap
                else:
                    diag[0] = f[0] + rolled[0, j]
                    diag[-1] = f[-1] + rolled[-1, j]
                diag[1:-1] = f[:-1] + f[1:]
                rows += [_flat(grid, axis, idx, j)]
                cols += [_flat(grid, axis, idx, j)]
                vals += [diag / h ** 2]
                rows += [_flat(grid, axis, idx[:-1], j), _flat(grid, axis, idx[1:], j)]
                cols += [_flat(grid, axis, idx[1:], j), _flat(grid, axis, idx[:-1], j)]
                vals += [-f / h ** 2, -f / h ** 2]
                if periodic:
                    rows += [_flat(grid, axis, np.array([0]), j),
                             _flat(grid, axis, np.array([n - 1]), j)]
                    cols += [_flat(grid, axis, np.array([n - 1]), j),
                             _flat(grid, axis, np.array([0]), j)]
                    vals += [np.array([-wrap / h ** 2]), np.array([-wrap / h ** 2])]
            mat = sp.csr_matrix(
                (np.concatenate(vals),
                 (np.concatenate(rows), np.concatenate(cols))),
                shape=(grid.size, grid.size))
        total = mat if total is None else total + mat
    return total


def _flat(grid, axis, idx, j):
    """Flat indices of line entries (idx along `axis`, offset j on the other)."""
    if grid.dim == 1:
        return idx
    if axis == 0:
        return idx * grid.n[1] + j
    return j * grid.n[1] + idx


def _edge_mask(grid, axis):
    mask = np.zeros(grid.shape, dtype=float)
    sl = [slice(None)] * grid.dim
    sl[axis] = 0
    mask[tuple(sl)] = 1.0
    sl[axis] = -1
    mask[tuple(sl)] = 1.0
    return mask


def _signed_edge_mask(grid, axis):
    mask = np.zeros(grid.shape, dtype=float)
    sl = [slice(None)] * grid.dim
    sl[axis] = 0
    mask[tuple(sl)] = -1.0
    sl[axis] = -1
    mask[tuple(sl)] = 1.0
    return mask


def ghost_lap_correction(grid, coeff):
    """Diagonal fixup turning zero-extension -div(a grad) rows into the
    linearization of edge-replicated (zero-flux) stencils."""
    coeff = np.broadcast_to(np.asarray(coeff, dtype=float), grid.shape)
    diag = np.zeros(grid.shape)
    for a in range(grid.dim):
        diag -= coeff * _edge_mask(grid, a) / grid.h[a] ** 2
    return sp.diags(diag.ravel())


def ghost_d1_correction(grid, coeff):
    """Diagonal fixup for central d/dx1 rows under edge replication."""
    diag = coeff * _signed_edge_mask(grid, 0) / (2.0 * grid.h[0])
    return sp.diags(diag.ravel())


def ghost_jacobian(op):
    """Jacobian of the edge-replicated residual stencils.

    Returns op.matrix plus the diagonal corrections accounting for ghost
    cells that copy the edge unknown instead of extending by zero.  On
    periodic grids this is just op.matrix.
    """
    grid = op.grid
    if grid.boundary == "periodic":
        return op.matrix
    if op.kind in ("Lc", "Lc1d", "LcPlusK2"):
        p_lap = ghost_lap_correction(grid, 1.0)
        p12 = ghost_d1_correction(grid, -op.c)
        p21 = ghost_d1_correction(grid, op.c)
        patch = sp.bmat([[p_lap, p12], [p21, p_lap]], format="csr")
    elif op.kind in ("Mc", "M0", "McInfty"):
        rho = _base_fields(op.base).c1
        p11 = ghost_lap_correction(grid, 1.0 / (2.0 * rho))
        p22 = ghost_lap_correction(grid, 2.0 * rho)
        p12 = ghost_d1_correction(grid, -op.c)
        p21 = ghost_d1_correction(grid, op.c)
        patch = sp.bmat([[p11, p12], [p21, p22]], format="csr")
    elif op.kind == "A":
        patch = ghost_lap_correction(grid, 1.0)
    else:
        raise ValueError("no ghost correction for kind %r" % op.kind)
    return op.matrix + patch


def ghost_symmetrized(op):
    """Copy of an operator with the symmetrized zero-flux boundary rows.

    The zero-extension convention is exact for decaying perturbations but
    pollutes quadratic forms evaluated on fields with nonvanishing far
    tails (the speed-derivative direction of a branch carries one in its
    phase).  The symmetrized ghost Jacobian removes that boundary
    contamination while keeping the operator symmetric.
    """
    g = ghost_jacobian(op)
    sym = (g + g.T) * 0.5
    out = AssembledOperator(op.kind, sym.tocsr(), op.grid, c=op.c, k=op.k,
                            base=op.base, pot_scale=op.pot_scale, rep=op.rep)
    return out


def div_vector_matrix(grid, bvec):
    """Matrix of u -> div(b u) with central differences."""
    total = None
    for axis in range(grid.dim):
        mat = partial_matrix(grid, axis) @ sp.diags(bvec[axis].ravel())
        total = mat if total is None else total + mat
    return total


def vector_grad_matrix(grid, bvec):
    """Matrix of u -> b . grad u (exact transpose of -div_vector_matrix)."""
    total = None
    for axis in range(grid.dim):
        mat = sp.diags(bvec[axis].ravel()) @ partial_matrix(grid, axis)
        total = mat if total is None else total + mat
    return total


# ---------------------------------------------------------------------------
# assembled operators

class AssembledOperator:
    """Sparse matrix of one operator kind together with its provenance."""

    def __init__(self, kind, matrix, grid, c=0.0, k=None, base=None,
                 pot_scale=1.0, rep=None):
        self.kind = kind
        self.matrix = matrix.tocsr()
        self.grid = grid
        self.c = c
        self.k = k
        self.base = base
        self.pot_scale = pot_scale
        self.rep = rep
        self._dense = None
        self._kernel_residual = None

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def n_components(self):
        return 1 if self.kind == "A" else 2

    def dense(self):
        if self._dense is None:
            self._dense = self.matrix.toarray()
        return self._dense

    def apply(self, field):
        if isinstance(field, PairField):
            return PairField.from_vector(self.grid,
                                         self.matrix @ field.ravel(), field.rep)
        return ScalarField(self.grid,
                           (self.matrix @ field.data.ravel()).reshape(self.grid.shape))

    def symmetry_defect(self):
        d = self.matrix - self.matrix.T
        return float(np.max(np.abs(d.data))) if d.nnz else 0.0

    def kernel_residual(self):
        """Residual of the analytic kernel identity on the discrete grid.

        max over translation axes of |op . (d_xa base)| / |d_xa base|,
        with the transverse-shift k^2 removed first; O(h^2) times stencil
        constants, and the natural scale for classifying kernel modes.
        """
        if self.base is None:
            return None
        from .profiles import translation_mode, _d1
        profile = _base_fields(self.base)
        shift = (self.k or 0.0) ** 2 if self.kind == "LcPlusK2" else 0.0
        worst = 0.0
        for a in range(self.grid.dim):
            if self.n_components == 2:
                if self.rep == "hydro" and profile.rep != "hydro":
                    raise ValueError("hydro operator with non-hydro base")
                if self.rep == "uv" and profile.rep == "hydro":
                    from .grid import hydro_to_uv
                    vec = translation_mode(hydro_to_uv(profile), a).ravel()
                else:
                    vec = translation_mode(profile, a).ravel()
            else:
                amp = (np.sqrt(profile.c1) if profile.rep == "hydro"
                       else profile.c1)
                vec = _d1(amp, a, self.grid.h[a], self.grid.dim).ravel()
            resid = self.matrix @ vec - shift * vec
            worst = max(worst, float(np.linalg.norm(resid)
                                     / np.linalg.norm(vec)))
        return worst

    def zero_threshold(self, factor=5.0):
        """Kernel classification threshold.

        Anchored at the measured discrete residual of the analytic kernel
        identity (an O(h^2) quantity) when a base wave is attached;
        otherwise falls back to 50 h^2 for unit-normalized far fields.
        """
        if self._kernel_residual is None and self.base is not None:
            self._kernel_residual = self.kernel_residual()
        if self._kernel_residual is not None:
            return max(factor * self._kernel_residual, 1e-11)
        h2 = max(h ** 2 for h in self.grid.h)
        return 50.0 * h2


def _base_fields(base):
    if isinstance(base, PairField):
        return base
    profile = getattr(base, "profile", None)
    if profile is not None:
        return profile
    raise TypeError("base must be a PairField or carry a .profile")


def _block(grid, a11, a12, a21, a22):
    return sp.bmat([[a11, a12], [a21, a22]], format="csr")


def assemble(kind, base=None, c=0.0, grid=None, spec=None, k=None):
    """Assemble one operator kind at a base wave (or far field)."""
    if kind not in SYMMETRIC_KINDS:
        raise ValueError("unknown operator kind %r" % kind)
    if base is not None:
        field = _base_fields(base)
        grid = field.grid
    elif kind != "LcInfty":
        raise ValueError("operator kind %r needs a base wave" % kind)
    elif grid is None:
        raise ValueError("far-field kinds still need a grid")

    if kind in ("Lc", "Lc1d", "LcPlusK2"):
        if kind == "Lc1d" and grid.dim != 1:
            raise ValueError("Lc1d needs a 1D grid")
        if field.rep == "hydro":
            from .grid import hydro_to_uv
            field = hydro_to_uv(field)
        if field.rep != "uv":
            raise ValueError("Lc needs a uv (or hydro) base")
        u1, u2 = field.c1, field.c2
        mod2 = u1 ** 2 + u2 ** 2
        fval, fp = spec.f(mod2), spec.fprime(mod2)
        lap = div_coeff_grad_matrix(grid, np.ones(grid.shape))
        d1 = partial_matrix(grid, 0)
        pot11 = -fval - 2.0 * fp * u1 ** 2
        pot22 = -fval - 2.0 * fp * u2 ** 2
        cross = -2.0 * fp * u1 * u2
        mat = _block(grid,
                     lap + sp.diags(pot11.ravel()),
                     -c * d1 + sp.diags(cross.ravel()),
                     c * d1 + sp.diags(cross.ravel()),
                     lap + sp.diags(pot22.ravel()))
        if kind == "LcPlusK2":
            if k is None:
                raise ValueError("LcPlusK2 needs the transverse wave number k")
            mat = mat + float(k) ** 2 * sp.identity(2 * grid.size, format="csr")
        scale = max(np.abs(pot11).max(), np.abs(pot22).max(), np.abs(cross).max())
        return AssembledOperator(kind, mat, grid, c=c, k=k, base=base,
                                 pot_scale=float(scale), rep="uv")

    if kind == "LcInfty":
        if spec is None:
            raise ValueError("LcInfty needs the nonlinear law")
        lap = div_coeff_grad_matrix(grid, np.ones(grid.shape))
        d1 = partial_matrix(grid, 0)
        gap = -2.0 * spec.fprime(spec.r0) * spec.r0
        eye = sp.identity(grid.size, format="csr")
        mat = _block(grid, lap + gap * eye, -c * d1, c * d1, lap)
        return AssembledOperator(kind, mat, grid, c=c, pot_scale=float(gap),
                                 rep="uv")

    if kind in ("Mc", "M0"):
        if field.rep != "hydro":
            raise ValueError("hydro kinds need a hydro base")
        rho, theta = field.c1, field.c2
        if rho.min() <= 1e-12:
            raise ValueError("vortex detected: min rho <= 0")
        if kind == "M0":
            if abs(c) > 0.0 or np.max(np.abs(theta)) > 1e-12:
                raise ValueError("M0 is the stationary operator (c=0, theta=0)")
        grads_rho = [g.data for g in gradient(ScalarField(grid, rho))]
        grad_rho_sq = sum(g ** 2 for g in grads_rho)
        lap_rho = sum(diff(ScalarField(grid, rho), a, 2).data
                      for a in range(grid.dim))
        pot11 = (-grad_rho_sq / (2.0 * rho ** 3) + lap_rho / (2.0 * rho ** 2)
                 - spec.fprime(rho))
        m11 = div_coeff_grad_matrix(grid, 1.0 / (2.0 * rho)) + sp.diags(pot11.ravel())
        m22 = 2.0 * div_coeff_grad_matrix(grid, rho)
        d1 = partial_matrix(grid, 0)
        grads_theta = [g.data for g in gradient(ScalarField(grid, theta))]
        m21 = c * d1 - 2.0 * div_vector_matrix(grid, grads_theta)
        m12 = -c * d1 + 2.0 * vector_grad_matrix(grid, grads_theta)
        mat = _block(grid, m11, m12, m21, m22)
        scale = max(np.abs(pot11).max(), 1.0)
        return AssembledOperator(kind, mat, grid, c=c, base=base,
                                 pot_scale=float(scale), rep="hydro")

    if kind == "McInfty":
        if field.rep != "hydro":
            raise ValueError("McInfty needs a hydro base")
        rho = field.c1
        m11 = (div_coeff_grad_matrix(grid, 1.0 / (2.0 * rho))
               + sp.diags((1.0 / rho).ravel()))
        m22 = 2.0 * div_coeff_grad_matrix(grid, rho)
        d1 = partial_matrix(grid, 0)
        mat = _block(grid, m11, -c * d1, c * d1, m22)
        return AssembledOperator(kind, mat, grid, c=c, base=base,
                                 pot_scale=float((1.0 / rho).max()), rep="hydro")

    if kind == "A":
        if field.rep == "hydro":
            phi = np.sqrt(field.c1)
        else:
            phi = field.c1
        mod2 = phi ** 2
        pot = -spec.f(mod2) - 2.0 * spec.fprime(mod2) * mod2
        mat = div_coeff_grad_matrix(grid, np.ones(grid.shape)) + sp.diags(pot.ravel())
        return AssembledOperator("A", mat, grid, base=base,
                                 pot_scale=float(np.abs(pot).max()), rep="scalar")

    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# the symplectic matrix and small maps

def j_apply(f):
    """J (f1, f2) = (f2, -f1)."""
    return PairField(f.grid, f.c2.copy(), -f.c1, f.rep)


def j_inverse_apply(f):
    """J^{-1} (f1, f2) = (-f2, f1)."""
    return PairField(f.grid, -f.c2, f.c1.copy(), f.rep)


def j_matrix(grid):
    eye = sp.identity(grid.size, format="csr")
    return sp.bmat([[None, eye], [-eye, None]], format="csr")


def k_map(f, base):
    """Isomorphism (f1, f2) -> (f1 - chi(D)(v f2), f2) with v = Im(base)."""
    v = _base_fields(base).c2
    low = chi_multiplier_array(f.grid, v * f.c2)
    return PairField(f.grid, f.c1 - low, f.c2.copy(), f.rep)


def k_adjoint(f, base):
    """Adjoint map (f1, f2) -> (f1, f2 - v chi(D) f1)."""
    v = _base_fields(base).c2
    low = chi_multiplier_array(f.grid, f.c1)
    return PairField(f.grid, f.c1.copy(), f.c2 - v * low, f.rep)


def tc_map(f, base):
    """Pointwise change of variables from (d rho, d theta) to (d u1, d u2)."""
    hyd = _base_fields(base)
    if hyd.rep != "hydro":
        raise ValueError("tc_map needs a hydro base")
    rho, theta = hyd.c1, hyd.c2
    if rho.min() <= 0.0:
        raise ValueError("tc_map needs min rho > 0")
    amp = np.sqrt(rho)
    du1 = np.cos(theta) / (2.0 * amp) * f.c1 - amp * np.sin(theta) * f.c2
    du2 = np.sin(theta) / (2.0 * amp) * f.c1 + amp * np.cos(theta) * f.c2
    return PairField(f.grid, du1, du2, "uv")


def tc_determinant(base):
    hyd = _base_fields(base)
    return 0.5 * np.ones_like(hyd.c1)


def quadratic_form(op, f):
    """f^T (op f) with the grid quadrature weight."""
    if isinstance(f, PairField):
        vec = f.ravel()
    else:
        vec = f.data.ravel()
    return float(vec @ (op.matrix @ vec)) * op.grid.cell_volume


# ---------------------------------------------------------------------------
# far-field coercivity constants

def _crossing(c):
    """Optimal split point a* in (c/sqrt(2), 1) where 2 - c^2/a^2 = 1 - a^2."""
    from scipy.optimize import brentq
    if not 0.0 < c < np.sqrt(2.0):
        raise ValueError("speed must lie in (0, sqrt(2))")
    gap = lambda a: (2.0 - c ** 2 / a ** 2) - (1.0 - a ** 2)
    lo = c / np.sqrt(2.0) * (1.0 + 1e-14) + 1e-300
    return brentq(gap, lo, 1.0 - 1e-15, xtol=1e-14, rtol=8.9e-16)


def random_smooth_pair(grid, rng, rep="uv", cutoff=0.25, zero_mean2=False):
    """Band-limited random pair field (low-pass filtered white noise)."""
    comps = []
    for _ in range(2):
        noise = rng.standard_normal(grid.shape)
        if grid.dim == 1:
            xi = np.abs(np.fft.fftfreq(grid.n[0]))
        else:
            xi = np.sqrt(np.add.outer(np.fft.fftfreq(grid.n[0]) ** 2,
                                      np.fft.fftfreq(grid.n[1]) ** 2))
        mask = np.exp(-(xi / cutoff) ** 2)
        smooth = np.real(np.fft.ifftn(np.fft.fftn(noise) * mask))
        comps.append(smooth / max(np.abs(smooth).max(), 1e-30))
    if zero_mean2:
        comps[1] = comps[1] - comps[1].mean()
    return PairField(grid, comps[0], comps[1], rep)


def coercivity_constant(c, kind="LcInfty-form", grid=None, spec=None,
                        base=None, n_fields=100, rng=None):
    """Best uniform lower bound of the far-field quadratic form.

    Maximizes min(2 - c^2/a^2, 1 - a^2) over the split parameter a and
    verifies the resulting bound against random smooth fields.  Returns a
    dict with the optimizer, the constant, and the violation count
    (expected 0).
    """
    a_opt = _crossing(c)
    delta = 1.0 - a_opt ** 2
    out = {"a_opt": float(a_opt), "a_opt_sq": float(a_opt ** 2),
           "delta_star": float(delta), "kind": kind,
           "violations": None, "n_fields": 0}
    if grid is None:
        return out
    rng = rng or np.random.default_rng(0)
    violations = 0
    if kind == "LcInfty-form":
        op = assemble("LcInfty", grid=grid, c=c, spec=spec)
        for _ in range(n_fields):
            f = random_smooth_pair(grid, rng)
            q = quadratic_form(op, f)
            n2 = _h1_pair_norm_sq(f)
            if q < delta * n2 * (1.0 - 1e-10):
                violations += 1
        out["bound"] = float(delta)
    elif kind == "McInfty-form":
        op = assemble("McInfty", base=base, c=c, spec=spec)
        rho = _base_fields(base).c1
        eta = min(1.0 / (2.0 * rho.max()), delta / rho.max(),
                  (2.0 - c ** 2 / a_opt ** 2) * rho.min(), 2.0 * rho.min())
        for _ in range(n_fields):
            f = random_smooth_pair(grid, rng)
            q = quadratic_form(op, f)
            n2 = _h1_pair_norm_sq(f)
            if q < eta * n2 * (1.0 - 1e-10):
                violations += 1
        out["bound"] = float(eta)
    else:
        raise ValueError("unknown coercivity kind %r" % kind)
    out["violations"] = violations
    out["n_fields"] = n_fields
    return out


def _h1_pair_norm_sq(f):
    grid = f.grid
    total = float(np.sum(f.c1 ** 2)) * grid.cell_volume
    for a in range(grid.dim):
        total += float(np.sum(diff(ScalarField(grid, f.c1), a).data ** 2)) * grid.cell_volume
        total += float(np.sum(diff(ScalarField(grid, f.c2), a).data ** 2)) * grid.cell_volume
    return total


# ---------------------------------------------------------------------------
# smoothing preconditioner

def _neg_lap_symbol(grid):
    parts = []
    for a in range(grid.dim):
        xi = grid.wavenumbers(a)
        parts.append((2.0 / grid.h[a] * np.sin(0.5 * xi * grid.h[a])) ** 2)
    if grid.dim == 1:
        return parts[0]
    return np.add.outer(parts[0], parts[1])


def precondition(f):
    """Smoothing isomorphism: (-Lap+1)^(-1/2) on comp1, (-Lap)^(-1/2) on comp2.

    Realized through the discrete Fourier symbol of the assembled
    Laplacian; the zero mode of the second component is set to zero.
    """
    grid = f.grid
    if grid.boundary != "periodic":
        raise ValueError("preconditioning requires a periodic grid")
    sym = _neg_lap_symbol(grid)
    mult1 = 1.0 / np.sqrt(sym + 1.0)
    with np.errstate(divide="ignore"):
        mult2 = np.where(sym > 0.0, 1.0 / np.sqrt(np.maximum(sym, 1e-300)), 0.0)
    c1 = np.real(np.fft.ifftn(mult1 * np.fft.fftn(f.c1)))
    c2 = np.real(np.fft.ifftn(mult2 * np.fft.fftn(f.c2)))
    return PairField(grid, c1, c2, f.rep)


def export_matrix_market(op, path):
    scipy.io.mmwrite(path, op.matrix)
