"""Uniform grids and sampled fields for waves on a nonvanishing background.

Grids cover [-L1, L1) x ... with N points per axis and spacing h = 2L/N,
so x = 0 is always a node.  Two boundary modes are supported:

* ``periodic`` -- derivative stencils and Fourier multipliers wrap around;
  used for the coordinate-map utilities acting on decaying fields.
* ``truncated`` -- fields are perturbations of a constant far field.
  Pointwise derivative stencils fall back to one-sided differences at the
  edges; operator assembly (operators.py) instead uses zero extension of
  the perturbation, which keeps matrices exactly symmetric.

Pair-valued samples carry a representation tag: ``"w"`` for coordinate
fields (w1, w2), ``"uv"`` for real/imaginary parts of a complex field,
``"hydro"`` for density/phase (rho, theta) with rho > 0.
"""

import struct

import numpy as np

REPRESENTATIONS = ("w", "uv", "hydro")

_MAGIC = b"NLSF"
_TAGS = {"scalar": 0, "w": 1, "uv": 2, "hydro": 3}
_TAGS_INV = {v: k for k, v in _TAGS.items()}


def _as_tuple(value, dim):
    if np.isscalar(value):
        return (value,) * dim
    value = tuple(value)
    if len(value) != dim:
        raise ValueError("expected %d per-axis values, got %r" % (dim, value))
    return value


class GridSpec:
    """Uniform grid on [-L, L)^dim with N (power of two) points per axis."""

    def __init__(self, dim, half_length, n, boundary="truncated"):
        if dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if boundary not in ("truncated", "periodic"):
            raise ValueError("unknown boundary mode %r" % boundary)
        self.dim = dim
        self.half_length = tuple(float(L) for L in _as_tuple(half_length, dim))
        self.n = tuple(int(N) for N in _as_tuple(n, dim))
        for N in self.n:
            if N < 64 or (N & (N - 1)) != 0:
                raise ValueError("points per axis must be a power of two >= 64")
        self.boundary = boundary
        self.h = tuple(2.0 * L / N for L, N in zip(self.half_length, self.n))

    @property
    def shape(self):
        return self.n

    @property
    def size(self):
        return int(np.prod(self.n))

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    def axis(self, a):
        """Coordinate samples along axis a (x = -L + j*h, includes 0)."""
        L, N, h = self.half_length[a], self.n[a], self.h[a]
        return -L + h * np.arange(N)

    def meshes(self):
        return np.meshgrid(*[self.axis(a) for a in range(self.dim)], indexing="ij")

    def wavenumbers(self, a):
        """Fourier wavenumbers xi = pi*k/L along axis a (fft order)."""
        N, L = self.n[a], self.half_length[a]
        return 2.0 * np.pi * np.fft.fftfreq(N, d=2.0 * L / N)

    def compatible(self, other):
        return (self.dim == other.dim and self.n == other.n
                and self.half_length == other.half_length
                and self.boundary == other.boundary)

    def __repr__(self):
        return "GridSpec(dim=%d, L=%s, N=%s, %s)" % (
            self.dim, self.half_length, self.n, self.boundary)


class ScalarField:
    def __init__(self, grid, data):
        data = np.asarray(data, dtype=float)
        if data.shape != grid.shape:
            raise ValueError("data shape %s does not match grid %s" % (data.shape, grid.shape))
        self.grid = grid
        self.data = data

    def copy(self):
        return ScalarField(self.grid, self.data.copy())


class PairField:
    """Two real sample arrays plus a representation tag."""

    def __init__(self, grid, c1, c2, rep):
        if rep not in REPRESENTATIONS:
            raise ValueError("unknown representation %r" % rep)
        c1 = np.asarray(c1, dtype=float)
        c2 = np.asarray(c2, dtype=float)
        if c1.shape != grid.shape or c2.shape != grid.shape:
            raise ValueError("component shape does not match grid")
        if rep == "hydro" and c1.min() <= 0.0:
            raise ValueError("hydro representation requires rho > 0 everywhere")
        self.grid = grid
        self.c1 = c1
        self.c2 = c2
        self.rep = rep

    def copy(self):
        return PairField(self.grid, self.c1.copy(), self.c2.copy(), self.rep)

    def ravel(self):
        """Stacked flat vector (component 1 first)."""
        return np.concatenate([self.c1.ravel(), self.c2.ravel()])

    @classmethod
    def from_vector(cls, grid, vec, rep):
        n = grid.size
        c1 = np.asarray(vec[:n], dtype=float).reshape(grid.shape)
        c2 = np.asarray(vec[n:], dtype=float).reshape(grid.shape)
        return cls(grid, c1, c2, rep)

    def as_complex(self):
        if self.rep == "hydro":
            return np.sqrt(self.c1) * np.exp(1j * self.c2)
        return self.c1 + 1j * self.c2


def pair_from_complex(grid, u, rep="uv"):
    return PairField(grid, np.real(u), np.imag(u), rep)


def uv_to_hydro(field):
    """Madelung change of variables; requires |u| > 0 everywhere."""
    if field.rep != "uv":
        raise ValueError("expected a uv field")
    rho = field.c1 ** 2 + field.c2 ** 2
    if rho.min() <= 0.0:
        raise ValueError("field vanishes somewhere; no density/phase form")
    theta = np.arctan2(field.c2, field.c1)
    if field.grid.dim == 1:
        theta = np.unwrap(theta)
    else:
        # anchor the first row, then unwrap every column against it
        row0 = np.unwrap(theta[0, :])
        theta = np.unwrap(theta, axis=0)
        theta += row0[None, :] - theta[0:1, :]
    return PairField(field.grid, rho, theta, "hydro")


def hydro_to_uv(field):
    if field.rep != "hydro":
        raise ValueError("expected a hydro field")
    amp = np.sqrt(field.c1)
    return PairField(field.grid, amp * np.cos(field.c2), amp * np.sin(field.c2), "uv")


# ---------------------------------------------------------------------------
# derivatives

def _diff_axis(data, axis, order, h, boundary):
    d = np.empty_like(data)
    f = np.moveaxis(data, axis, 0)
    out = np.moveaxis(d, axis, 0)
    if order == 1:
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
        if boundary == "periodic":
            out[0] = (f[1] - f[-1]) / (2.0 * h)
            out[-1] = (f[0] - f[-2]) / (2.0 * h)
        else:
            out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
            out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    elif order == 2:
        out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h ** 2
        if boundary == "periodic":
            out[0] = (f[1] - 2.0 * f[0] + f[-1]) / h ** 2
            out[-1] = (f[0] - 2.0 * f[-1] + f[-2]) / h ** 2
        else:
            out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h ** 2
            out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h ** 2
    else:
        raise ValueError("order must be 1 or 2")
    return d


def diff(field, axis=0, order=1):
    """Second-order finite difference of a scalar field along one axis."""
    grid = field.grid
    if axis < 0 or axis >= grid.dim:
        raise ValueError("invalid axis %d" % axis)
    data = _diff_axis(field.data, axis, order, grid.h[axis], grid.boundary)
    return ScalarField(grid, data)


def gradient(field):
    return [diff(field, a, 1) for a in range(field.grid.dim)]


def laplacian_field(field):
    out = diff(field, 0, 2).data
    for a in range(1, field.grid.dim):
        out = out + diff(field, a, 2).data
    return ScalarField(field.grid, out)


# ---------------------------------------------------------------------------
# Fourier multipliers

def chi_profile(xi_norm):
    """Radial low-pass bump: 1 for |xi|<=1, 0 for |xi|>=2, raised-cosine between.

    The transition shape is fixed so that results are bit-reproducible.
    """
    xi_norm = np.asarray(xi_norm, dtype=float)
    out = np.zeros_like(xi_norm)
    out[xi_norm <= 1.0] = 1.0
    mid = (xi_norm > 1.0) & (xi_norm < 2.0)
    out[mid] = 0.5 * (1.0 + np.cos(np.pi * (xi_norm[mid] - 1.0)))
    return out


def _xi_norm_grid(grid):
    if grid.dim == 1:
        return np.abs(grid.wavenumbers(0))
    xi0 = grid.wavenumbers(0)[:, None]
    xi1 = grid.wavenumbers(1)[None, :]
    return np.sqrt(xi0 ** 2 + xi1 ** 2)


def apply_multiplier(field, symbol):
    """Apply a real Fourier multiplier (array over fft-ordered modes)."""
    if field.grid.boundary != "periodic":
        raise ValueError("Fourier multipliers require a periodic grid")
    fhat = np.fft.fftn(field.data)
    return ScalarField(field.grid, np.real(np.fft.ifftn(symbol * fhat)))


def chi_multiplier(field):
    """Low-pass multiplier chi(D) used by the coordinate map."""
    return apply_multiplier(field, chi_profile(_xi_norm_grid(field.grid)))


def chi_multiplier_array(grid, data):
    return chi_multiplier(ScalarField(grid, data)).data


# ---------------------------------------------------------------------------
# inner products and norms

def _dot(a, b, vol):
    return float(np.sum(a * b) * vol)


def inner(f, g, kind="L2"):
    """Inner product of two pair fields.

    Kinds: ``L2`` both components in L2; ``H1xHdot1`` adds first-component
    gradients to its L2 part and keeps only gradients for the second
    component; ``duality`` is the plain L2 pairing (used for dual products).
    """
    if not f.grid.compatible(g.grid):
        raise ValueError("fields live on different grids")
    vol = f.grid.cell_volume
    if kind in ("L2", "duality"):
        return _dot(f.c1, g.c1, vol) + _dot(f.c2, g.c2, vol)
    if kind == "H1xHdot1":
        total = _dot(f.c1, g.c1, vol)
        f1 = ScalarField(f.grid, f.c1)
        g1 = ScalarField(g.grid, g.c1)
        f2 = ScalarField(f.grid, f.c2)
        g2 = ScalarField(g.grid, g.c2)
        for a in range(f.grid.dim):
            total += _dot(diff(f1, a).data, diff(g1, a).data, vol)
            total += _dot(diff(f2, a).data, diff(g2, a).data, vol)
        return total
    raise ValueError("unknown inner-product kind %r" % kind)


def norm(f, kind="L2"):
    return float(np.sqrt(max(inner(f, f, kind), 0.0)))


def scalar_norm(field, order=0, homogeneous=False):
    """Discrete Sobolev norm of a scalar field up to the given order."""
    vol = field.grid.cell_volume
    total = 0.0 if homogeneous else _dot(field.data, field.data, vol)
    if order >= 1:
        grads = gradient(field)
        for gra in grads:
            total += _dot(gra.data, gra.data, vol)
        if order >= 2:
            for gra in grads:
                for a in range(field.grid.dim):
                    d2 = diff(gra, a, 1)
                    total += _dot(d2.data, d2.data, vol)
    return float(np.sqrt(total))


# ---------------------------------------------------------------------------
# serialization

def save_csv(field, path):
    grid = field.grid
    mesh = grid.meshes()
    cols = [m.ravel() for m in mesh]
    if isinstance(field, ScalarField):
        cols.append(field.data.ravel())
        header = ",".join(["x", "y"][: grid.dim] + ["value"])
    else:
        cols += [field.c1.ravel(), field.c2.ravel()]
        header = ",".join(["x", "y"][: grid.dim] + ["comp1", "comp2"])
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in zip(*cols):
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def save_binary(field, path):
    """Compact dump: 32-byte header (magic, dim, N, L, tag) + float64 data."""
    grid = field.grid
    if isinstance(field, ScalarField):
        tag, ncomp, arrays = "scalar", 1, [field.data]
    else:
        tag, ncomp, arrays = field.rep, 2, [field.c1, field.c2]
    n1 = grid.n[0]
    n2 = grid.n[1] if grid.dim == 2 else 0
    l1 = grid.half_length[0]
    l2 = grid.half_length[1] if grid.dim == 2 else 0.0
    header = struct.pack("<4sBBBBIIdd", _MAGIC, 1, grid.dim, _TAGS[tag],
                         ncomp, n1, n2, l1, l2)
    assert len(header) == 32
    with open(path, "wb") as fh:
        fh.write(header)
        for arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_binary(path, boundary="truncated"):
    with open(path, "rb") as fh:
        header = fh.read(32)
        magic, _ver, dim, tag_code, ncomp, n1, n2, l1, l2 = struct.unpack(
            "<4sBBBBIIdd", header)
        if magic != _MAGIC:
            raise ValueError("not a field dump: bad magic")
        if dim == 1:
            grid = GridSpec(1, l1, n1, boundary)
        else:
            grid = GridSpec(2, (l1, l2), (n1, n2), boundary)
        count = grid.size * ncomp
        data = np.frombuffer(fh.read(count * 8), dtype="<f8")
    tag = _TAGS_INV[tag_code]
    if ncomp == 1:
        return ScalarField(grid, data.reshape(grid.shape))
    c1 = data[: grid.size].reshape(grid.shape)
    c2 = data[grid.size:].reshape(grid.shape)
    return PairField(grid, c1, c2, tag)
