"""Truncated Fock-space and Pauli matrices, the Dirac factorization identity and
numerical checks of the SU(1,1) / osp(1|2) commutator tables.

Combined spin-boson operators use the index ``i = s*N + n`` (``s = 0`` is the
upper block), i.e. ``kron(spin, boson)``.
"""

from __future__ import annotations

import ast
import json
import operator
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

SQRT2 = np.sqrt(2.0)

BASES = ("spin", "boson", "spin_boson", "grid", "spin_grid")


@dataclass(frozen=True)
class FockSpec:
    """Boson truncation ``dim`` and the number of top levels dropped in checks."""

    dim: int
    interior_margin: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"Fock dimension must be >= 2, got {self.dim}")
        if not 0 <= self.interior_margin <= self.dim // 2:
            raise ValueError(
                f"interior margin must lie in [0, {self.dim // 2}], got {self.interior_margin}"
            )


class OperatorMatrix:
    """Dense complex matrix tagged with the basis it acts on."""

    __slots__ = ("m", "basis")

    def __init__(self, m, basis: str):
        m = np.asarray(m, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {m.shape}")
        if basis not in BASES:
            raise ValueError(f"unknown basis {basis!r}")
        if basis == "spin" and m.shape[0] != 2:
            raise ValueError("spin operators are 2x2")
        if basis in ("spin_boson", "spin_grid") and m.shape[0] % 2:
            raise ValueError(f"{basis} operator needs even dimension")
        m.setflags(write=False)
        self.m = m
        self.basis = basis

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    @property
    def n_modes(self) -> int:
        """Size of the boson/grid factor."""
        return self.dim // 2 if self.basis in ("spin_boson", "spin_grid") else self.dim

    def block(self, s: int, t: int) -> np.ndarray:
        """Spin block ``(s, t)`` of a spin-boson or spin-grid operator."""
        n = self.n_modes
        return self.m[s * n : (s + 1) * n, t * n : (t + 1) * n]

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.m.conj().T, self.basis)

    def is_hermitian(self, atol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.m - self.m.conj().T), initial=0.0) <= atol)

    def _check(self, other: "OperatorMatrix"):
        if self.basis != other.basis or self.dim != other.dim:
            raise ValueError(
                f"incompatible operators: {self.basis}({self.dim}) vs {other.basis}({other.dim})"
            )

    def __matmul__(self, other):
        self._check(other)
        return OperatorMatrix(self.m @ other.m, self.basis)

    def __add__(self, other):
        if np.isscalar(other):
            return OperatorMatrix(self.m + other * np.eye(self.dim), self.basis)
        self._check(other)
        return OperatorMatrix(self.m + other.m, self.basis)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return OperatorMatrix(-self.m, self.basis)

    def __mul__(self, c):
        if isinstance(c, OperatorMatrix):
            return self @ c
        return OperatorMatrix(self.m * c, self.basis)

    def __rmul__(self, c):
        return OperatorMatrix(c * self.m, self.basis)

    def __truediv__(self, c):
        return OperatorMatrix(self.m / c, self.basis)

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("operator powers must be non-negative integers")
        return OperatorMatrix(np.linalg.matrix_power(self.m, int(k)), self.basis)

    def __repr__(self):
        return f"OperatorMatrix(basis={self.basis!r}, dim={self.dim})"


def identity(dim: int, basis: str) -> OperatorMatrix:
    return OperatorMatrix(np.eye(dim), basis)


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    return a @ b - b @ a


def anticommutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    return a @ b + b @ a


def spin_tensor(spin, other: OperatorMatrix) -> OperatorMatrix:
    """``other (x) spin`` in the ``i = s*N + n`` layout."""
    s = spin.m if isinstance(spin, OperatorMatrix) else np.asarray(spin)
    basis = {"boson": "spin_boson", "grid": "spin_grid"}[other.basis]
    return OperatorMatrix(np.kron(s, other.m), basis)


def lift(op: OperatorMatrix) -> OperatorMatrix:
    """Embed a boson (or grid) operator as ``op (x) identity_spin``."""
    return spin_tensor(np.eye(2), op)


def fock_operators(spec: FockSpec) -> dict[str, OperatorMatrix]:
    n = spec.dim
    am = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)
    ap = am.T.copy()
    a_minus = OperatorMatrix(am, "boson")
    a_plus = OperatorMatrix(ap, "boson")
    q = (a_plus + a_minus) / SQRT2
    p = 1j * (a_plus - a_minus) / SQRT2
    h_osc = a_plus @ a_minus + 0.5
    return {"a_minus": a_minus, "a_plus": a_plus, "q": q, "p": p, "H_osc": h_osc}


def pauli_set() -> dict[str, OperatorMatrix]:
    mats = {
        "s1": [[0, 1], [1, 0]],
        "s2": [[0, -1j], [1j, 0]],
        "s3": [[1, 0], [0, -1]],
        "s_plus": [[0, 1], [0, 0]],
        "s_minus": [[0, 0], [1, 0]],
    }
    return {k: OperatorMatrix(v, "spin") for k, v in mats.items()}


_PAULI_KEYS = {1: "s1", 2: "s2", 3: "s3"}


def levi_civita(j: int, k: int, l: int) -> int:
    return int((j - k) * (k - l) * (l - j) / 2)


@dataclass(frozen=True)
class Factorization:
    sigma_comb: OperatorMatrix
    residual: OperatorMatrix
    sum_of_squares: OperatorMatrix

    def identity_defect(self) -> OperatorMatrix:
        """``(A^2 + B^2) (x) I - (sigma_comb^2 + residual)``; zero up to rounding."""
        return self.sum_of_squares - (self.sigma_comb @ self.sigma_comb + self.residual)


def dirac_factorize(A: OperatorMatrix, B: OperatorMatrix, j: int, k: int) -> Factorization:
    """Write ``A^2 + B^2`` as ``(A s_j + B s_k)^2 - i eps_{jkl} [A, B] s_l``."""
    if j == k:
        raise ValueError("Dirac factorization needs two distinct Pauli indices")
    if {j, k} - {1, 2, 3}:
        raise ValueError(f"Pauli indices must be in {{1, 2, 3}}, got {j}, {k}")
    A._check(B)
    pauli = pauli_set()
    l = 6 - j - k
    comb = spin_tensor(pauli[_PAULI_KEYS[j]], A) + spin_tensor(pauli[_PAULI_KEYS[k]], B)
    residual = spin_tensor(pauli[_PAULI_KEYS[l]], commutator(A, B)) * (-1j * levi_civita(j, k, l))
    return Factorization(comb, residual, lift(A @ A + B @ B))


def build_sigma(spec: FockSpec) -> OperatorMatrix:
    """``Sigma = [[0, a^-], [a^+, 0]]``, equal to ``(q s1 - p s2)/sqrt2`` and ``a^- s+ + a^+ s-``."""
    f = fock_operators(spec)
    n = spec.dim
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    m[:n, n:] = f["a_minus"].m
    m[n:, :n] = f["a_plus"].m
    return OperatorMatrix(m, "spin_boson")


def sigma_routes(spec: FockSpec) -> dict[str, OperatorMatrix]:
    """The three constructions of Sigma, for cross-checking."""
    f = fock_operators(spec)
    pauli = pauli_set()
    return {
        "blocks": build_sigma(spec),
        "jaynes_cummings": spin_tensor(pauli["s_plus"], f["a_minus"])
        + spin_tensor(pauli["s_minus"], f["a_plus"]),
        "pauli": (spin_tensor(pauli["s1"], f["q"]) - spin_tensor(pauli["s2"], f["p"])) / SQRT2,
    }


def build_susy_hamiltonian(spec: FockSpec) -> dict[str, OperatorMatrix]:
    f = fock_operators(spec)
    sigma = build_sigma(spec)
    s3 = spin_tensor(pauli_set()["s3"], identity(spec.dim, "boson"))
    return {
        "H": sigma @ sigma - 0.5 * s3,
        "H_plus": f["a_minus"] @ f["a_plus"],
        "H_minus": f["a_plus"] @ f["a_minus"],
    }


def superalgebra_generators(spec: FockSpec) -> dict[str, OperatorMatrix]:
    f = fock_operators(spec)
    pauli = pauli_set()
    ap, am = f["a_plus"], f["a_minus"]
    sp, sm = pauli["s_plus"], pauli["s_minus"]
    return {
        "U_plus": spin_tensor(sp, ap),
        "U_minus": spin_tensor(sm, am),
        "V_plus": spin_tensor(sp, am),
        "V_minus": spin_tensor(sm, ap),
        "K_plus": lift(ap @ ap / 2),
        "K_minus": lift(am @ am / 2),
    }


def operator_namespace(spec: FockSpec) -> dict[str, OperatorMatrix]:
    """Every named operator usable in relation expressions, on the spin-boson space."""
    f = fock_operators(spec)
    ns = {k: lift(v) for k, v in f.items()}
    ns.update({k: spin_tensor(v, identity(spec.dim, "boson")) for k, v in pauli_set().items()})
    ns.update(superalgebra_generators(spec))
    ns["Sigma"] = build_sigma(spec)
    ns["H"] = build_susy_hamiltonian(spec)["H"]
    ns["I"] = identity(2 * spec.dim, "spin_boson")
    return ns


# --- relation expressions -----------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.MatMult: operator.matmul,
    ast.Div: operator.truediv,
}


def evaluate_expression(text: str, namespace: Mapping[str, OperatorMatrix]):
    """Evaluate an operator expression such as ``"H*s3 - 0.5"``.

    ``*`` between operators is the matrix product, ``**`` an integer power, ``1j``
    the imaginary unit; bare numbers added to operators mean multiples of the
    identity.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse operator expression {text!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.Name):
            try:
                return namespace[node.id]
            except KeyError:
                raise KeyError(f"unknown operator {node.id!r} in {text!r}") from None
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                return ev(node.left) ** ev(node.right)
            if type(node.op) in _BINOPS:
                return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"unsupported syntax in operator expression {text!r}")

    return ev(tree)


def _expand_signs(text: str, upper: bool) -> str:
    # "±"/"∓" right after a name is a suffix (_plus/_minus), otherwise a sign
    out = []
    for i, ch in enumerate(text):
        if ch in "±∓":
            positive = (ch == "±") == upper
            if i > 0 and (text[i - 1].isalnum() or text[i - 1] == "_"):
                out.append("_plus" if positive else "_minus")
            else:
                out.append("+" if positive else "-")
        else:
            out.append(ch)
    return "".join(out)


BRACKETS = ("commutator", "anticommutator", "product")


@dataclass(frozen=True)
class AlgebraRelation:
    """``bracket(lhs) == rhs``; ``±``/``∓`` in the text expand to both sign cases.

    ``margin`` is the ladder-power depth of the relation: the number of top Fock
    levels its truncated matrices can corrupt.
    """

    name: str
    lhs: tuple
    rhs: str
    bracket: str = "commutator"
    margin: int = 2
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "lhs", tuple(self.lhs))
        if self.bracket not in BRACKETS:
            raise ValueError(f"unknown bracket {self.bracket!r}")
        if self.bracket != "product" and len(self.lhs) != 2:
            raise ValueError(f"{self.bracket} needs exactly two operands")
        if not self.lhs:
            raise ValueError("relation needs at least one lhs operand")

    def cases(self) -> list[tuple[tuple, str]]:
        texts = (*self.lhs, self.rhs)
        if not any(c in t for t in texts for c in "±∓"):
            return [(self.lhs, self.rhs)]
        out = []
        for upper in (True, False):
            e = [_expand_signs(t, upper) for t in texts]
            out.append((tuple(e[:-1]), e[-1]))
        return out

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "lhs": list(self.lhs),
            "rhs": self.rhs,
            "bracket": self.bracket,
            "margin": self.margin,
        }
        if self.note:
            d["note"] = self.note
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "AlgebraRelation":
        missing = {"name", "lhs", "rhs"} - set(d)
        if missing:
            raise ValueError(f"relation record missing fields: {sorted(missing)}")
        return cls(
            name=d["name"],
            lhs=tuple(d["lhs"]),
            rhs=d["rhs"],
            bracket=d.get("bracket", "commutator"),
            margin=int(d.get("margin", 2)),
            note=d.get("note", ""),
        )


BUILTIN_RELATIONS: tuple[AlgebraRelation, ...] = (
    AlgebraRelation("[U+,U-] = H s3 - 1/2", ("U_plus", "U_minus"), "H*s3 - 0.5", margin=2),
    AlgebraRelation("[V+,V-] = H s3 + 1/2", ("V_plus", "V_minus"), "H*s3 + 0.5", margin=2),
    AlgebraRelation("[U±,V±] = ∓s±^2", ("U±", "V±"), "∓s±*s±", margin=2),
    AlgebraRelation("[U±,V∓] = ±2 K± s3", ("U±", "V∓"), "±2*K±*s3", margin=2),
    AlgebraRelation("[H,K±] = ±2 K±", ("H", "K±"), "±2*K±", margin=4),
    AlgebraRelation("[K+,K-] = -H", ("K_plus", "K_minus"), "-H", margin=4),
    AlgebraRelation("[K±,U∓] = ∓V∓", ("K±", "U∓"), "∓V∓", margin=3),
    AlgebraRelation(
        "[K±,V±] = ∓U±",
        ("K±", "V±"),
        "∓U±",
        margin=3,
        note="index pattern fixed so the bracket is non-trivial; [K-,V+] vanishes identically",
    ),
    AlgebraRelation("{V+,V-} = Sigma^2", ("V_plus", "V_minus"), "Sigma*Sigma",
                    bracket="anticommutator", margin=2),
    AlgebraRelation("[q,p] = i", ("q", "p"), "1j", margin=2),
    AlgebraRelation("[a-,a+] = 1", ("a_minus", "a_plus"), "1", margin=2),
)


def interior_indices(op: OperatorMatrix, margin: int) -> np.ndarray:
    """Indices of the first ``N - margin`` Fock states in every spin block."""
    if op.basis == "spin":
        return np.arange(2)
    n = op.n_modes
    keep = np.arange(n - margin)
    if op.basis in ("spin_boson", "spin_grid"):
        return np.concatenate([keep, keep + n])
    return keep


def project_interior(op: OperatorMatrix, margin: int) -> np.ndarray:
    idx = interior_indices(op, margin)
    return op.m[np.ix_(idx, idx)]


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def _bracket(kind: str, ops: list) -> OperatorMatrix:
    if kind == "commutator":
        return commutator(*ops)
    if kind == "anticommutator":
        return anticommutator(*ops)
    out = ops[0]
    for o in ops[1:]:
        out = out @ o
    return out


def relation_difference(rel: AlgebraRelation, spec: FockSpec, namespace=None) -> list[OperatorMatrix]:
    """``lhs - rhs`` on the full truncated space, one matrix per sign case."""
    ns = namespace if namespace is not None else operator_namespace(spec)
    diffs = []
    for lhs, rhs in rel.cases():
        left = _bracket(rel.bracket, [evaluate_expression(t, ns) for t in lhs])
        right = evaluate_expression(rhs, ns)
        diffs.append(left - right)
    return diffs


def check_relation(rel: AlgebraRelation, spec: FockSpec, namespace=None) -> float:
    """Operator norm of ``lhs - rhs`` on the interior projection (max over sign cases)."""
    if spec.interior_margin < rel.margin:
        raise ValueError(
            f"relation {rel.name!r} needs interior margin >= {rel.margin}, "
            f"got {spec.interior_margin}"
        )
    diffs = relation_difference(rel, spec, namespace)
    return max(operator_norm(project_interior(d, spec.interior_margin)) for d in diffs)


@dataclass(frozen=True)
class RelationResult:
    name: str
    residual: float
    margin: int
    tolerance: float
    passed: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.residual < self.tolerance))


def check_relations(
    relations: Iterable[AlgebraRelation], spec: FockSpec, tol: float
) -> list[RelationResult]:
    ns = operator_namespace(spec)
    return [
        RelationResult(rel.name, check_relation(rel, spec, ns), spec.interior_margin, tol)
        for rel in relations
    ]


def relations_to_json(relations: Iterable[AlgebraRelation]) -> str:
    return json.dumps([r.to_dict() for r in relations], ensure_ascii=False, indent=2)


def relations_from_json(text: str) -> list[AlgebraRelation]:
    data = json.loads(text)
    if isinstance(data, dict):
        data = data.get("relations", [])
    return [AlgebraRelation.from_dict(d) for d in data]
