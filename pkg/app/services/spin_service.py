"""
Binary spin chains on a ring, with the order-1 class counts as density of states.

A local potential that depends only on neighbouring symbols makes the energy of
a word a function of its quiver, so the partition function is a sum over quiver
classes weighted by their sizes.
"""
import logging
import math
import sys
from typing import Hashable, List, Mapping, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from app.errors import AlphabetError, DeBruijnError, DomainError, NumericalInstabilityError
from app.models import CyclicWord, Quiver
from app.schemas import SpinParams
from app.services.entropy_service import (
    binary_log_linear_count,
    binary_pairs,
    binary_W1_closed_form,
    implied_x11,
)
from app.services.quiver_service import edge_windows

logger = logging.getLogger(__name__)

ENSEMBLES = ("linear", "necklace")

# Largest x with exp(x) finite
LOG_FLOAT_MAX = math.log(sys.float_info.max)


def exp_or_inf(x: float) -> float:
    return math.exp(x) if x < LOG_FLOAT_MAX else math.inf


def _spins(word: CyclicWord) -> np.ndarray:
    if word.alphabet.size != 2:
        raise AlphabetError(f"Spin energies need a binary alphabet, got {word.alphabet.size} symbols")
    return 2 * word.indices - 1


def word_energy(word: CyclicWord, params: SpinParams) -> float:
    """Direct cyclic sum of -c*J*s_j*s_(j+1) - K*s_j"""
    sigma = _spins(word)
    coupling = -params.effective_coupling * np.sum(sigma * np.roll(sigma, -1))
    field = -params.K * np.sum(sigma)
    return float(coupling + field)


def closed_form_energy(x00: int, xstar: int, params: SpinParams) -> float:
    implied_x11(x00, xstar, params.ell)
    j = params.effective_coupling
    return 2 * params.K * x00 + (4 * j + 2 * params.K) * xstar - (j + params.K) * params.ell


def ising_potential(params: SpinParams) -> dict:
    """Local potential table keyed by the ordered pair of binary symbols"""
    j = params.effective_coupling
    return {
        (str(a), str(b)): -j * (2 * a - 1) * (2 * b - 1) - params.K * (2 * a - 1)
        for a in (0, 1) for b in (0, 1)
    }


def potential_energy(word: CyclicWord, table: Mapping[Tuple[Hashable, ...], float], order: int = 1) -> float:
    """Sum of a user-supplied potential over the cyclic (order+1)-grams of the word"""
    total = 0.0
    for window in edge_windows(word, order).tolist():
        key = tuple(word.alphabet.decode(window))
        if key not in table:
            raise DeBruijnError(f"Potential table has no entry for {key!r}")
        total += table[key]
    return total


def quiver_energy(quiver: Quiver, table: Mapping[Tuple[Hashable, ...], float]) -> float:
    """Energy of any word with this quiver: sum of multiplicity * potential per edge"""
    total = 0.0
    for u, v, mult in quiver.edges():
        source = quiver.vertex_label(u)
        target = quiver.vertex_label(v)
        key = tuple(quiver.alphabet.decode(source + target[-1:]))
        if key not in table:
            raise DeBruijnError(f"Potential table has no entry for {key!r}")
        total += mult * table[key]
    return total


def _density(x00: int, xstar: int, ell: int, ensemble: str) -> float:
    if ensemble == "linear":
        return binary_log_linear_count(x00, xstar, ell)
    if ensemble == "necklace":
        return binary_W1_closed_form(x00, xstar, ell)
    raise DomainError(f"Unknown ensemble {ensemble!r}, expected one of {ENSEMBLES}")


def _log_weights(params: SpinParams, ensemble: str) -> List[Tuple[int, int, float, float]]:
    rows = []
    for x00, xstar in binary_pairs(params.ell):
        energy = closed_form_energy(x00, xstar, params)
        rows.append((x00, xstar, _density(x00, xstar, params.ell, ensemble), energy))
    return rows


def partition_function(params: SpinParams, ensemble: str = "linear") -> float:
    """
    log Z as a sum over (x00, x*) classes of density * exp(-beta * E).

    The linear ensemble counts strings with a distinguished first site, so beta = 0
    gives ell * log 2. The necklace ensemble counts cyclic words (rotation classes).
    """
    rows = _log_weights(params, ensemble)
    return float(logsumexp([density - params.beta * energy for _, _, density, energy in rows]))


def spin_grid(params: SpinParams, ensemble: str = "linear") -> List[dict]:
    rows = _log_weights(params, ensemble)
    log_z = float(logsumexp([density - params.beta * energy for _, _, density, energy in rows]))
    grid = []
    for x00, xstar, density, energy in rows:
        grid.append({
            "x00": x00,
            "xstar": xstar,
            "H1": binary_W1_closed_form(x00, xstar, params.ell),
            "log_linear_words": binary_log_linear_count(x00, xstar, params.ell),
            "energy": energy,
            "log_boltzmann_weight": -params.beta * energy,
            "boltzmann_weight": exp_or_inf(-params.beta * energy),
            "probability": math.exp(density - params.beta * energy - log_z),
        })
    return grid


def transfer_matrix_log_partition(params: SpinParams) -> float:
    """log trace(T^ell) for the symmetric 2x2 transfer matrix"""
    beta, j, k = params.beta, params.effective_coupling, params.K
    spins = np.array([-1.0, 1.0])
    exponents = beta * j * np.outer(spins, spins) + beta * k * (spins[:, None] + spins[None, :]) / 2
    # T = e^shift * exp(exponents - shift), largest entry of the scaled matrix is 1
    shift = float(exponents.max())
    low, high = np.linalg.eigvalsh(np.exp(exponents - shift))
    tail = (low / high) ** params.ell
    if tail <= -1:
        raise NumericalInstabilityError(
            f"Transfer-matrix eigenvalues cancel at beta*J={params.beta * j:g}, ell={params.ell}")
    return float(params.ell * (shift + math.log(high)) + math.log1p(tail))


def _log_cosh(x: float) -> float:
    x = abs(x)
    return x + math.log1p(math.exp(-2 * x)) - math.log(2)


def _log_sinh(x: float) -> float:
    x = abs(x)
    if x == 0:
        return -math.inf
    if x < 1:
        return math.log(math.sinh(x))
    return x + math.log1p(-math.exp(-2 * x)) - math.log(2)


def log_thermodynamic_limit(params: SpinParams) -> float:
    """log of e^(bJ) cosh(bK) + sqrt(e^(2bJ) sinh(bK)^2 + e^(-2bJ)), finite for any finite input"""
    a = params.beta * params.effective_coupling
    b = params.beta * params.K
    root = 0.5 * float(np.logaddexp(2 * a + 2 * _log_sinh(b), -2 * a))
    return float(np.logaddexp(a + _log_cosh(b), root))


def thermodynamic_limit(params: SpinParams) -> float:
    """lim Z^(1/ell); infinite when the value overflows a float"""
    return exp_or_inf(log_thermodynamic_limit(params))


def convergence_sequence(params: SpinParams, lengths: Sequence[int], ensemble: str = "linear") -> List[float]:
    """Z^(1/ell) for each length, other parameters fixed"""
    values = []
    for ell in lengths:
        at_length = params.model_copy(update={"ell": ell})
        values.append(exp_or_inf(partition_function(at_length, ensemble) / ell))
    return values


__all__ = [
    "ENSEMBLES",
    "word_energy",
    "closed_form_energy",
    "ising_potential",
    "potential_energy",
    "quiver_energy",
    "partition_function",
    "spin_grid",
    "transfer_matrix_log_partition",
    "log_thermodynamic_limit",
    "thermodynamic_limit",
    "exp_or_inf",
    "convergence_sequence",
]
