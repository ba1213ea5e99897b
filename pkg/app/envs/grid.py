"""
Occupancy grid over a 2-D map at resolution ``step_scale``.

Cells are indexed (ix, iy); a cell is free when its centre lies outside every
wall. Hop counts use the 4-neighbour graph over free cells.
"""
import logging
import math
from collections import deque
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from app.core.exceptions import ContractViolationError
from app.schemas.env import Wall

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]
UNREACHABLE = math.inf
_NEIGHBOURS = ((1, 0), (-1, 0), (0, 1), (0, -1))


class OccupancyGrid:
    def __init__(self, low: Sequence[float], high: Sequence[float], walls: Sequence[Wall],
                 resolution: float = 1.0, cache_size: int = 1024):
        self.low = np.asarray(low, dtype=np.float64)
        self.high = np.asarray(high, dtype=np.float64)
        self.resolution = float(resolution)
        self.shape = tuple(int(round((h - l) / self.resolution)) for l, h in zip(self.low, self.high))
        xs = self.low[0] + (np.arange(self.shape[0]) + 0.5) * self.resolution
        ys = self.low[1] + (np.arange(self.shape[1]) + 0.5) * self.resolution
        cx, cy = np.meshgrid(xs, ys, indexing="ij")
        blocked = np.zeros(self.shape, dtype=bool)
        for wall in walls:
            blocked |= (cx >= wall.x_min) & (cx <= wall.x_max) & (cy >= wall.y_min) & (cy <= wall.y_max)
        self.free = ~blocked
        self._distance_field = lru_cache(maxsize=cache_size)(self._flood)

    def cell_of(self, position) -> Cell:
        idx = np.floor((np.asarray(position[:2], dtype=np.float64) - self.low) / self.resolution).astype(int)
        idx = np.clip(idx, 0, np.asarray(self.shape) - 1)
        return int(idx[0]), int(idx[1])

    def center(self, cell: Cell) -> np.ndarray:
        return self.low + (np.asarray(cell, dtype=np.float64) + 0.5) * self.resolution

    def in_grid(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.shape[0] and 0 <= cell[1] < self.shape[1]

    def is_free_cell(self, cell: Cell) -> bool:
        return self.in_grid(cell) and bool(self.free[cell])

    def free_cells(self) -> np.ndarray:
        return np.argwhere(self.free)

    def _check(self, cell: Cell) -> Cell:
        cell = (int(cell[0]), int(cell[1]))
        if not self.is_free_cell(cell):
            raise ContractViolationError(f"Cell {cell} is outside the map or inside a wall")
        return cell

    def _flood(self, source: Cell) -> np.ndarray:
        dist = np.full(self.shape, -1, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        nx, ny = self.shape
        while queue:
            x, y = queue.popleft()
            step = dist[x, y] + 1
            for dx, dy in _NEIGHBOURS:
                u, v = x + dx, y + dy
                if 0 <= u < nx and 0 <= v < ny and self.free[u, v] and dist[u, v] < 0:
                    dist[u, v] = step
                    queue.append((u, v))
        dist.setflags(write=False)
        return dist

    def distance_field(self, source: Cell) -> np.ndarray:
        """Hop counts from ``source`` to every cell; -1 marks walls and unreachable cells."""
        return self._distance_field(self._check(source))

    def bfs_distance(self, a: Cell, b: Cell) -> float:
        b = self._check(b)
        hops = self.distance_field(a)[b]
        return UNREACHABLE if hops < 0 else int(hops)

    def _adjacency(self) -> Tuple[np.ndarray, coo_matrix]:
        cells = self.free_cells()
        index = -np.ones(self.shape, dtype=np.int64)
        index[cells[:, 0], cells[:, 1]] = np.arange(len(cells))
        rows, cols = [], []
        for dx, dy in ((1, 0), (0, 1)):
            a = index[: self.shape[0] - dx, : self.shape[1] - dy]
            b = index[dx:, dy:]
            mask = (a >= 0) & (b >= 0)
            rows.append(a[mask])
            cols.append(b[mask])
        rows, cols = np.concatenate(rows), np.concatenate(cols)
        graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(cells), len(cells)))
        return cells, graph.tocsr()

    def max_bfs_distance(self, chunk: int = 256) -> int:
        """Largest finite hop count over all free-cell pairs."""
        cells, graph = self._adjacency()
        best = 0
        for start in range(0, len(cells), chunk):
            indices = np.arange(start, min(start + chunk, len(cells)))
            dist = shortest_path(graph, method="D", directed=False, unweighted=True, indices=indices)
            finite = dist[np.isfinite(dist)]
            if finite.size:
                best = max(best, int(finite.max()))
        logger.debug(f"max BFS distance over {len(cells)} free cells: {best}")
        return best

    def cells_at_distance(self, source: Cell, low: float, high: float) -> List[Cell]:
        field = self.distance_field(source)
        hits = np.argwhere((field >= low) & (field <= high))
        return [(int(x), int(y)) for x, y in hits]
