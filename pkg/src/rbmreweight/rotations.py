"""Local basis rotations encoded as an extra Boltzmann layer.

Measuring sigma^x or sigma^y on a site is done by attaching a new unit that is
coupled to the site's z-unit with a purely imaginary weight; the z-unit then
becomes a hidden unit that is summed over (twice, bra and ket).  The rotation
matrix entries are

    u_x(vx, vz) = exp[i pi/4 (vx vz - vx - vz + 1)]   ->  [[1, 1], [1, -1]]
    u_y(vy, vz) = exp[i pi/4 (1 - vy vz)]             ->  [[1, i], [i, 1]]

and the constant i pi/4 in each exponent is dropped as a global phase.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import LayeredNetwork, NetworkParams, promote_to_layered

QUARTER_PI = 0.25 * np.pi

#: Rotation link weight per axis.
LINK = {"X": 1j * QUARTER_PI, "Y": -1j * QUARTER_PI}
#: Bias added to the new rotation unit and to the (now hidden) z-unit.
ROTATION_BIAS = {"X": -1j * QUARTER_PI, "Y": 0.0}
Z_BIAS_SHIFT = {"X": -1j * QUARTER_PI, "Y": 0.0}

# The rotated amplitude is sum_z u(w, z) c_z = <w*|psi>, with |w*> the complex
# conjugate of the eigenvector |w>.  For y that conjugation swaps the two
# eigenvectors, so a readout of +1 on a y-unit means sigma^y = -1.
EIGENVALUE_SIGN = {"Z": 1, "X": 1, "Y": -1}


@dataclass(frozen=True)
class MeasurementBasis:
    """Per-site measurement axis, one of ``Z``, ``X``, ``Y``."""

    axes: str

    def __post_init__(self):
        axes = self.axes.upper().replace("I", "Z")
        bad = set(axes) - set("XYZ")
        if bad:
            raise ValueError(f"unknown basis axes {sorted(bad)} in {self.axes!r}")
        object.__setattr__(self, "axes", axes)

    def __len__(self):
        return len(self.axes)

    @property
    def rotated_sites(self) -> list[int]:
        return [i for i, a in enumerate(self.axes) if a != "Z"]

    @classmethod
    def coerce(cls, basis) -> "MeasurementBasis":
        return basis if isinstance(basis, cls) else cls(str(basis))


def rotation_entry_x(vx: int, vz: int) -> complex:
    return complex(np.exp(1j * QUARTER_PI * (vx * vz - vx - vz + 1)))


def rotation_entry_y(vy: int, vz: int) -> complex:
    return complex(np.exp(1j * QUARTER_PI * (1 - vy * vz)))


def rotation_matrix(axis: str) -> np.ndarray:
    """Unnormalized 2x2 matrix ``U[w, z]``, rows/cols ordered (+1, -1)."""
    f = {"X": rotation_entry_x, "Y": rotation_entry_y,
         "Z": lambda w, z: complex(w == z)}[axis.upper()]
    return np.array([[f(w, z) for z in (1, -1)] for w in (1, -1)])


def attach_rotations(params: NetworkParams, basis) -> LayeredNetwork:
    """Build the deep network whose physical layer is measured in ``basis``.

    Layer layout (couplings only between neighbours):

    * no rotated site:      ``[z, h]``
    * every site rotated:   ``[rot, z_rot, h]``
    * mixed:                ``[z_plain, h, z_rot, rot]``

    ``z_rot`` and ``h`` are duplicated; ``rot`` and ``z_plain`` are physical.
    """
    basis = MeasurementBasis.coerce(basis)
    if len(basis) != params.n_visible:
        raise ValueError(f"basis has {len(basis)} sites, network has {params.n_visible}")
    rot = basis.rotated_sites
    if not rot:
        net = promote_to_layered(params)
        return LayeredNetwork(net.layers, net.couplings, net.biases, net.duplicated,
                              axes=basis.axes)
    plain = [i for i in range(params.n_visible) if i not in rot]
    rot_axes = [basis.axes[i] for i in rot]
    links = np.diag([LINK[a] for a in rot_axes])
    rot_bias = np.array([ROTATION_BIAS[a] for a in rot_axes], dtype=complex)
    z_rot_bias = params.visible_bias[rot] + np.array([Z_BIAS_SHIFT[a] for a in rot_axes])
    w_rot = params.weights[rot, :]
    n_rot, m = len(rot), params.n_hidden
    pos = {site: p for p, site in enumerate(rot)}

    if not plain:
        return LayeredNetwork(
            layers=(n_rot, n_rot, m),
            couplings=(links, w_rot),
            biases=(rot_bias, z_rot_bias, params.hidden_bias),
            duplicated=frozenset({1, 2}),
            readout=tuple((0, pos[i]) for i in range(params.n_visible)),
            axes=basis.axes,
        )
    ppos = {site: p for p, site in enumerate(plain)}
    readout = tuple((0, ppos[i]) if i in ppos else (3, pos[i]) for i in range(params.n_visible))
    return LayeredNetwork(
        layers=(len(plain), m, n_rot, n_rot),
        couplings=(params.weights[plain, :], w_rot.T, links),
        biases=(params.visible_bias[plain], params.hidden_bias, z_rot_bias, rot_bias),
        duplicated=frozenset({1, 2}),
        readout=readout,
        axes=basis.axes,
    )


def dropped_global_phase(basis) -> complex:
    """Factor removed from every amplitude by dropping the constant i pi/4 per rotated site."""
    basis = MeasurementBasis.coerce(basis)
    return complex(np.exp(1j * QUARTER_PI * len(basis.rotated_sites)))


def dense_rotation(basis) -> np.ndarray:
    """Kronecker product of the per-site unnormalized rotation matrices."""
    basis = MeasurementBasis.coerce(basis)
    u = np.ones((1, 1), dtype=complex)
    for a in basis.axes:
        u = np.kron(u, rotation_matrix(a))
    return u


def eigenvalue_signs(net: LayeredNetwork) -> np.ndarray:
    return np.array([EIGENVALUE_SIGN[a] for a in net.axes])
