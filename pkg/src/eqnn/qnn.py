"""Model assembly, forward evaluation, losses, and accuracy.

A ``QnnModel`` glues together a feature-map circuit (inputs only), a
variational circuit (weights only), and a measurement head:

* ``"regression"`` — y' = P(even-parity basis states) - P(odd-parity),
  which on one qubit is simply P(|0>) - P(|1>), a value in [-1, 1].
* ``"parity"`` — binary class probabilities (P(even), P(odd)).

Model zoo:

* ``simplified`` — 1 qubit, H + RY(x) encoder, single RY(w) ansatz,
  regression head.  Its forward has the closed form cos(x + w + pi/2).
* ``benchmark`` — ZZ-style encoder + 3-rep RY ansatz, parity head.
* ``eqnn1/2/3`` — economical encoder + 1/2/3-rep RY ansatz, parity head.

Batch evaluation walks the gate list once over a ``(batch, dim)``
amplitude array, so one call evaluates the whole dataset.  Per-sample
results are identical to one-at-a-time simulation; batch means use
``np.mean`` (pairwise summation) as the one documented reduction order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .circuit import (
    Circuit,
    Gate,
    Input,
    Weight,
    bind,
    build_benchmark_feature_map,
    build_efm,
    build_real_amplitudes,
    concat,
    evaluate,
    gate_count,
)
from .errors import UsageError
from .statevector import (
    StateVector,
    kernel_cnot,
    kernel_h,
    kernel_phase,
    kernel_ry,
    zero_state,
)

REGRESSION = "regression"
PARITY = "parity"
HEADS = (REGRESSION, PARITY)

SQUARED_ERROR = "squared_error"
CROSS_ENTROPY = "cross_entropy"
LOSS_KINDS = (SQUARED_ERROR, CROSS_ENTROPY)

MODEL_NAMES = ("benchmark", "eqnn1", "eqnn2", "eqnn3")

PROB_EPS = 1e-12  # clamp under the log in cross-entropy


@dataclass(frozen=True)
class Regression:
    y: float


@dataclass(frozen=True)
class ClassProbs:
    p0: float
    p1: float


@dataclass(frozen=True, eq=False)
class QnnModel:
    name: str
    feature_map: Circuit
    variational: Circuit
    head: str

    def __post_init__(self):
        if self.head not in HEADS:
            raise UsageError(f"unknown head {self.head!r}; expected one of {HEADS}")
        if self.feature_map.n_qubits != self.variational.n_qubits:
            raise UsageError(
                f"feature map acts on {self.feature_map.n_qubits} qubits but "
                f"variational circuit on {self.variational.n_qubits}"
            )
        if self.feature_map.weight_arity:
            raise UsageError("feature map must not contain trainable weights")
        if self.variational.input_arity:
            raise UsageError("variational circuit must not contain data inputs")

    @property
    def n_qubits(self) -> int:
        return self.feature_map.n_qubits

    @property
    def n_inputs(self) -> int:
        return self.feature_map.input_arity

    @property
    def n_weights(self) -> int:
        return self.variational.weight_arity

    @cached_property
    def circuit(self) -> Circuit:
        return concat(self.feature_map, self.variational)


def simplified_model() -> QnnModel:
    """The 1-qubit regression model: encode H, RY(x); train one RY(w)."""
    feature_map = Circuit(1, (Gate("h", (0,)), Gate("ry", (0,), Input(0))))
    variational = Circuit(1, (Gate("ry", (0,), Weight(0)),))
    return QnnModel("simplified", feature_map, variational, REGRESSION)


def build_model(name: str, rescale: str = "default") -> QnnModel:
    """Build one of the named two-qubit classifiers.

    ``rescale`` selects the economical encoder's input map (see
    ``build_efm``); the benchmark encoder has no rescale knob.
    """
    if name == "benchmark":
        return QnnModel(
            name, build_benchmark_feature_map(), build_real_amplitudes(2, 3), PARITY
        )
    if name in ("eqnn1", "eqnn2", "eqnn3"):
        reps = int(name[-1])
        return QnnModel(
            name, build_efm(rescale=rescale), build_real_amplitudes(2, reps), PARITY
        )
    raise UsageError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")


def parity_signs(n_qubits: int) -> np.ndarray:
    """+1 for even-popcount basis indices, -1 for odd."""
    idx = np.arange(1 << n_qubits)
    bits = idx[:, None] >> np.arange(n_qubits)[None, :] & 1
    return np.where(bits.sum(axis=1) % 2 == 0, 1.0, -1.0)


# --------------------------------------------------------------------------
# Simulation


def simulate(circuit: Circuit, inputs, weights) -> StateVector:
    """Bind and run a circuit gate by gate from the all-zeros state."""
    state = zero_state(circuit.n_qubits)
    amps = state.amps
    for g in bind(circuit, inputs, weights):
        if g.name == "h":
            amps = kernel_h(amps, g.qubits[0])
        elif g.name == "phase":
            amps = kernel_phase(amps, g.angle, g.qubits[0])
        elif g.name == "ry":
            amps = kernel_ry(amps, g.angle, g.qubits[0])
        else:
            amps = kernel_cnot(amps, g.qubits[0], g.qubits[1])
    return StateVector(circuit.n_qubits, amps)


def _check_rows(model: QnnModel, X: np.ndarray, w: np.ndarray):
    if X.ndim != 2 or X.shape[1] != model.n_inputs:
        raise UsageError(
            f"model {model.name} takes {model.n_inputs} input(s) per row, "
            f"got array of shape {X.shape}"
        )
    if w.shape != (model.n_weights,):
        raise UsageError(
            f"model {model.name} has {model.n_weights} weight(s), "
            f"got array of shape {w.shape}"
        )


def probabilities_batch(model: QnnModel, X, w) -> np.ndarray:
    """Basis-state probabilities for each input row: shape (batch, 2**n)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    w = np.asarray(w, dtype=float)
    _check_rows(model, X, w)
    amps = np.zeros((X.shape[0], 1 << model.n_qubits), dtype=complex)
    amps[:, 0] = 1.0
    for gate in model.circuit.gates:
        if gate.name == "h":
            amps = kernel_h(amps, gate.qubits[0])
        elif gate.name == "cnot":
            amps = kernel_cnot(amps, gate.qubits[0], gate.qubits[1])
        else:
            theta = evaluate(gate.angle, X, w)
            if gate.name == "phase":
                amps = kernel_phase(amps, theta, gate.qubits[0])
            else:
                amps = kernel_ry(amps, theta, gate.qubits[0])
    return np.abs(amps) ** 2


def predict_regression(model: QnnModel, X, w) -> np.ndarray:
    """y' = P(even parity) - P(odd parity) for each input row."""
    probs = probabilities_batch(model, X, w)
    return probs @ parity_signs(model.n_qubits)


def predict_probs(model: QnnModel, X, w) -> np.ndarray:
    """Class-probability pairs (P(class 0), P(class 1)), shape (batch, 2)."""
    probs = probabilities_batch(model, X, w)
    even = probs @ (parity_signs(model.n_qubits) > 0).astype(float)
    return np.stack([even, 1.0 - even], axis=-1)


def forward(model: QnnModel, x, w) -> Regression | ClassProbs:
    """Evaluate the model on a single input point."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if model.head == REGRESSION:
        return Regression(float(predict_regression(model, x[None, :], w)[0]))
    p0, p1 = predict_probs(model, x[None, :], w)[0]
    return ClassProbs(float(p0), float(p1))


# --------------------------------------------------------------------------
# Losses and metrics


def loss(pred, target, kind: str) -> float:
    """Per-sample loss.

    ``squared_error`` pairs a ``Regression`` prediction with a real
    target; ``cross_entropy`` pairs a ``ClassProbs`` prediction with a
    target probability pair (one-hot for hard labels), natural log,
    probabilities clamped at 1e-12.
    """
    if kind == SQUARED_ERROR:
        if not isinstance(pred, Regression):
            raise UsageError("squared_error needs a Regression prediction")
        return float((pred.y - float(target)) ** 2)
    if kind == CROSS_ENTROPY:
        if not isinstance(pred, ClassProbs):
            raise UsageError("cross_entropy needs a ClassProbs prediction")
        t0, t1 = target
        return float(
            -(
                t0 * np.log(max(pred.p0, PROB_EPS))
                + t1 * np.log(max(pred.p1, PROB_EPS))
            )
        )
    raise UsageError(f"unknown loss kind {kind!r}; expected one of {LOSS_KINDS}")


def _check_pairing(model: QnnModel, dataset, kind: str):
    if len(dataset) == 0:
        raise UsageError("dataset is empty")
    if kind not in LOSS_KINDS:
        raise UsageError(f"unknown loss kind {kind!r}; expected one of {LOSS_KINDS}")
    if kind == SQUARED_ERROR and (
        model.head != REGRESSION or dataset.kind != "regression"
    ):
        raise UsageError(
            "squared_error needs a regression-head model and a regression dataset"
        )
    if kind == CROSS_ENTROPY and (
        model.head != PARITY or dataset.kind != "classification"
    ):
        raise UsageError(
            "cross_entropy needs a parity-head model and a classification dataset"
        )


def batch_loss(model: QnnModel, w, dataset, kind: str) -> float:
    """Arithmetic mean of per-sample losses over a dataset."""
    _check_pairing(model, dataset, kind)
    X = dataset.features_array()
    targets = dataset.targets_array()
    if kind == SQUARED_ERROR:
        y = predict_regression(model, X, w)
        return float(np.mean((y - targets) ** 2))
    probs = predict_probs(model, X, w)
    picked = probs[np.arange(len(dataset)), targets.astype(int)]
    return float(np.mean(-np.log(np.maximum(picked, PROB_EPS))))


def decide(probs: ClassProbs) -> int:
    """Hard decision rule; an exact tie resolves to class 0."""
    return 1 if probs.p1 > probs.p0 else 0


def predict_class(model: QnnModel, x, w) -> int:
    """Class of a single input under the tie-goes-to-0 decision rule."""
    pred = forward(model, x, w)
    if not isinstance(pred, ClassProbs):
        raise UsageError(f"model {model.name} has no class output")
    return decide(pred)


def accuracy(model: QnnModel, w, dataset) -> float:
    """Fraction of dataset samples whose predicted class matches the label."""
    if len(dataset) == 0:
        raise UsageError("dataset is empty")
    if model.head != PARITY or dataset.kind != "classification":
        raise UsageError("accuracy needs a parity-head model and labeled classes")
    probs = predict_probs(model, dataset.features_array(), w)
    predicted = (probs[:, 1] > probs[:, 0]).astype(int)
    return float(np.mean(predicted == dataset.targets_array().astype(int)))


def gate_summary(model: QnnModel) -> dict:
    """Feature-map / variational / total gate counts."""
    fm, var = gate_count(model.feature_map), gate_count(model.variational)
    return {"feature_map": fm, "variational": var, "total": fm + var}
