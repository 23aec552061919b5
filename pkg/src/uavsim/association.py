"""Strongest-RSRP cell selection and neighbour ranking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deployment import NetworkLayout
from .propagation import CouplingMatrix


def rsrp(tx_power, coupling_gain):
    """Wideband RSRP in dBm: transmit power plus coupling gain."""
    out = np.asarray(tx_power, float) + np.asarray(coupling_gain, float)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ServingAssignment:
    ue_id: int
    serving_cell: int
    serving_rsrp: float
    serving_pathloss: float
    ranked_neighbors: list  # [(cell, rsrp dBm, pathloss dB)], strongest first


@dataclass(frozen=True, eq=False)
class Associations:
    """Network-wide association; row ``u`` of the ranked arrays lists cells by RSRP.

    ``ranked_cells[:, 0]`` is the serving cell; the "pathloss" columns hold
    the coupling loss a UE would estimate (tx power minus RSRP).
    """

    ranked_cells: np.ndarray      # (U, C)
    ranked_rsrp: np.ndarray       # (U, C) dBm
    ranked_pathloss: np.ndarray   # (U, C) dB

    @property
    def serving(self) -> np.ndarray:
        return self.ranked_cells[:, 0]

    @property
    def serving_rsrp(self) -> np.ndarray:
        return self.ranked_rsrp[:, 0]

    @property
    def serving_pathloss(self) -> np.ndarray:
        return self.ranked_pathloss[:, 0]

    @property
    def num_neighbors(self) -> int:
        return self.ranked_cells.shape[1] - 1

    def __len__(self):
        return len(self.ranked_cells)

    def __getitem__(self, u: int) -> ServingAssignment:
        neigh = [(int(c), float(r), float(p)) for c, r, p in zip(
            self.ranked_cells[u, 1:], self.ranked_rsrp[u, 1:], self.ranked_pathloss[u, 1:])]
        return ServingAssignment(
            ue_id=int(u), serving_cell=int(self.ranked_cells[u, 0]),
            serving_rsrp=float(self.ranked_rsrp[u, 0]),
            serving_pathloss=float(self.ranked_pathloss[u, 0]),
            ranked_neighbors=neigh)

    def __iter__(self):
        return (self[u] for u in range(len(self)))

    def pathloss_ratios(self, n: int) -> np.ndarray:
        """Vectorised :func:`pathloss_ratio` for every UE."""
        _check_index(n, self.num_neighbors)
        return self.ranked_pathloss[:, n] - self.ranked_pathloss[:, 0]

    def rsrp_ratios(self, n: int) -> np.ndarray:
        _check_index(n, self.num_neighbors)
        return self.ranked_rsrp[:, 0] - self.ranked_rsrp[:, n]


def associate(coupling: CouplingMatrix | np.ndarray, tx_power=46.0) -> Associations:
    """Rank all cells per UE by RSRP; equal RSRP goes to the lower cell index.

    ``tx_power`` is a scalar, a per-cell array or a :class:`NetworkLayout`.
    """
    if isinstance(tx_power, NetworkLayout):
        tx_power = tx_power.tx_power
    cg = coupling.coupling_gain if isinstance(coupling, CouplingMatrix) else np.asarray(coupling, float)
    cg = np.atleast_2d(cg)
    tx = np.broadcast_to(np.asarray(tx_power, float), (cg.shape[1],))
    r = tx[None, :] + cg
    order = np.argsort(-r, axis=1, kind="stable")
    ranked_rsrp = np.take_along_axis(r, order, axis=1)
    ranked_pl = -np.take_along_axis(cg, order, axis=1)
    return Associations(order, ranked_rsrp, ranked_pl)


def _check_index(n, count):
    if not 1 <= n <= count:
        raise IndexError(f"neighbour index {n} outside 1..{count}")


def pathloss_ratio(assignment: ServingAssignment, n: int) -> float:
    """PL of the n-th strongest neighbour (1-based) minus serving PL, in dB."""
    _check_index(n, len(assignment.ranked_neighbors))
    return assignment.ranked_neighbors[n - 1][2] - assignment.serving_pathloss


def rsrp_ratio(assignment: ServingAssignment, n: int) -> float:
    """Serving RSRP over the n-th strongest neighbour RSRP, in dB."""
    _check_index(n, len(assignment.ranked_neighbors))
    return assignment.serving_rsrp - assignment.ranked_neighbors[n - 1][1]
