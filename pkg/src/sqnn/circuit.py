"""Single-qubit circuit algebra.

Rotation gates, the three-rotation neuron Rz(gamma)Ry(beta)Rz(alpha), a
projector-valued observable with eigenvalues +1/-1, and the measured
expectation value computed two ways: by explicit 2x2 matrix products and
by the closed-form trigonometric expression. The two paths are exact
mirrors of each other and are cross-checked in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AngleSet",
    "QubitState",
    "Observable",
    "rotation_gate",
    "neuron_matrix",
    "effective_neuron",
    "expectation_matrix",
    "expectation_closed_form",
    "expectation_gradient",
    "expectation_batch",
    "gradient_batch",
]


def _require_finite(**angles: float) -> None:
    for name, value in angles.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class AngleSet:
    """The five circuit angles for one evaluation: three neuron rotations,
    the input-state polar angle and the observable projector angle."""

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    theta: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        _require_finite(alpha=self.alpha, beta=self.beta, gamma=self.gamma,
                        theta=self.theta, omega=self.omega)


@dataclass(frozen=True)
class QubitState:
    """Input state cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.

    The relative phase phi defaults to 0; a nonzero value only matters for
    the matrix evaluation path.
    """

    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        _require_finite(theta=self.theta, phi=self.phi)

    def amplitudes(self) -> np.ndarray:
        return np.array(
            [math.cos(self.theta / 2),
             np.exp(1j * self.phi) * math.sin(self.theta / 2)],
            dtype=complex,
        )


@dataclass(frozen=True)
class Observable:
    """Two-outcome observable lambda0*P0 + lambda1*P1.

    P1 is the rank-one projector onto the Bloch direction (omega, varphi)
    and P0 = I - P1. The eigenvalues are stored rather than hardcoded, but
    every trained model in this package uses the default +1/-1 pair.
    """

    omega: float = 0.0
    varphi: float = 0.0
    lambda0: float = 1.0
    lambda1: float = -1.0

    def __post_init__(self):
        _require_finite(omega=self.omega, varphi=self.varphi,
                        lambda0=self.lambda0, lambda1=self.lambda1)

    def projector_p1(self) -> np.ndarray:
        c, s = math.cos(self.omega / 2), math.sin(self.omega / 2)
        ph = np.exp(1j * self.varphi)
        return np.array([[c * c, c * s * ph.conjugate()],
                         [c * s * ph, s * s]], dtype=complex)

    def projector_p0(self) -> np.ndarray:
        return np.eye(2, dtype=complex) - self.projector_p1()

    def basis_change(self) -> np.ndarray:
        """Unitary whose columns are unit eigenvectors of the projector
        pair, so a computational-basis measurement after applying it
        realizes the observable."""
        c, s = math.cos(self.omega / 2), math.sin(self.omega / 2)
        ph = np.exp(1j * self.varphi)
        return np.array([[c, -s * ph.conjugate()], [s * ph, c]], dtype=complex)


def rotation_gate(axis: str, angle: float) -> np.ndarray:
    """Standard single-qubit rotation matrix about the x, y or z axis.

    Rx(t) = [[cos(t/2), -i sin(t/2)], [-i sin(t/2), cos(t/2)]]
    Ry(t) = [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]]
    Rz(t) = diag(e^{-i t/2}, e^{i t/2})
    """
    if not math.isfinite(angle):
        raise ValueError(f"rotation angle must be finite, got {angle!r}")
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if axis == "y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "z":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]], dtype=complex)
    raise ValueError(f"unknown rotation axis {axis!r}, expected 'x', 'y' or 'z'")


def neuron_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """The general single-qubit neuron Rz(gamma) @ Ry(beta) @ Rz(alpha),
    the most general unitary up to a global phase."""
    return rotation_gate("z", gamma) @ rotation_gate("y", beta) @ rotation_gate("z", alpha)


def effective_neuron(neurons) -> np.ndarray:
    """Collapse a chain of neurons into one unitary.

    `neurons` is a sequence of (alpha, beta, gamma) triples applied in
    order, so the result is N_K @ ... @ N_2 @ N_1.
    """
    triples = list(neurons)
    if not triples:
        raise ValueError("effective_neuron requires at least one neuron")
    acc = np.eye(2, dtype=complex)
    for alpha, beta, gamma in triples:
        acc = neuron_matrix(alpha, beta, gamma) @ acc
    return acc


def expectation_matrix(angles: AngleSet,
                       state: QubitState | None = None,
                       obs: Observable | None = None) -> float:
    """Expectation value via explicit matrix-vector products.

    When `state` or `obs` is omitted it is built from the angle set with
    zero phase. Passing them explicitly allows nonzero state/projector
    phases, which the closed-form path deliberately does not model.
    """
    if state is None:
        state = QubitState(theta=angles.theta)
    if obs is None:
        obs = Observable(omega=angles.omega)
    amp = obs.basis_change() @ neuron_matrix(angles.alpha, angles.beta, angles.gamma) @ state.amplitudes()
    p0 = float(np.abs(amp[0]) ** 2)
    p1 = float(np.abs(amp[1]) ** 2)
    return obs.lambda0 * p0 + obs.lambda1 * p1


def expectation_batch(alpha, beta, gamma, theta, omega):
    """Closed-form expectation, vectorized over numpy-broadcastable angles.

    Evaluates, with all phases zero,

        y = cos(b) cos(t) cos(w) - cos(a) sin(b) sin(t) cos(w)
            - sin(b) cos(g) cos(t) sin(w) + sin(a) sin(g) sin(t) sin(w)
            - cos(a) cos(b) cos(g) sin(t) sin(w)
    """
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    cg, sg = np.cos(gamma), np.sin(gamma)
    ct, st = np.cos(theta), np.sin(theta)
    cw, sw = np.cos(omega), np.sin(omega)
    return (cb * ct * cw
            - ca * sb * st * cw
            - sb * cg * ct * sw
            + sa * sg * st * sw
            - ca * cb * cg * st * sw)


def expectation_closed_form(angles: AngleSet) -> float:
    """Closed-form expectation of one angle set (phases zero).

    Reduces to cos(b)cos(t) - cos(a)sin(b)sin(t) at omega = 0 and to
    cos(b) when theta = omega = 0.
    """
    return float(expectation_batch(angles.alpha, angles.beta, angles.gamma,
                                   angles.theta, angles.omega))


def gradient_batch(alpha, beta, gamma, theta, omega):
    """Analytic partial derivatives of the closed-form expectation with
    respect to (alpha, beta, gamma, theta, omega), vectorized.

    Returns a 5-tuple of arrays broadcast to the common input shape.
    """
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    cg, sg = np.cos(gamma), np.sin(gamma)
    ct, st = np.cos(theta), np.sin(theta)
    cw, sw = np.cos(omega), np.sin(omega)
    d_alpha = sa * sb * st * cw + ca * sg * st * sw + sa * cb * cg * st * sw
    d_beta = (-sb * ct * cw - ca * cb * st * cw
              - cb * cg * ct * sw + ca * sb * cg * st * sw)
    d_gamma = sb * sg * ct * sw + sa * cg * st * sw + ca * cb * sg * st * sw
    d_theta = (-cb * st * cw - ca * sb * ct * cw
               + sb * cg * st * sw + sa * sg * ct * sw - ca * cb * cg * ct * sw)
    d_omega = (-cb * ct * sw + ca * sb * st * sw
               - sb * cg * ct * cw + sa * sg * st * cw - ca * cb * cg * st * cw)
    return d_alpha, d_beta, d_gamma, d_theta, d_omega


def expectation_gradient(angles: AngleSet) -> np.ndarray:
    """Gradient of the closed-form expectation for one angle set, as the
    5-vector (d/d alpha, d/d beta, d/d gamma, d/d theta, d/d omega)."""
    parts = gradient_batch(angles.alpha, angles.beta, angles.gamma,
                           angles.theta, angles.omega)
    return np.array([float(p) for p in parts])
