"""
Cell structure of the Ford domain of a cyclic regular elliptic group
Ideal boundary complex, its cone, gluing uniqueness, cycle words and a numerical probe
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx
from networkx.utils import UnionFind
import numpy as np

from config import settings
from core.audit import AuditLogger, InputValidator
from core.exceptions import validation_error
from models.geometry import BALL, ProjectivePoint
from models.schemas import EdgeRecord, FaceRecord, FordComplexDocument, ProbeReport, VertexRecord
from services.ellip import Q0, ellip_service
from services.heis import heis_service
from services.isect import Q_BALL, TWO_PI, isect_service

logger = logging.getLogger(__name__)

EdgeKey = Tuple[bool, int, int]
Word = Tuple[Tuple[str, int], ...]


def _check(result: Tuple[bool, Optional[str]]):
    ok, message = result
    if not ok:
        raise validation_error(message)


def edge_key(j: int, k: int, primed: bool = False) -> EdgeKey:
    return (primed, min(j, k), max(j, k))


def edge_label(key: EdgeKey) -> str:
    primed, j, k = key
    return f"e{chr(39) if primed else ''}({j},{k})"


@dataclass
class Face:
    label: str
    sphere: int
    edges: List[EdgeKey]


@dataclass
class CellComplex2:
    """Polygons glued along labelled edges; vertices are corner classes"""
    n: int
    faces: List[Face]
    vertices: List[FrozenSet[Tuple[int, int]]] = field(default_factory=list)

    @property
    def edges(self) -> Dict[EdgeKey, List[int]]:
        """Edge key to the indices of the faces it borders"""
        table: Dict[EdgeKey, List[int]] = {}
        for idx, face in enumerate(self.faces):
            for key in face.edges:
                table.setdefault(key, []).append(idx)
        return table

    @property
    def euler(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.faces)

    def face_degrees(self) -> List[int]:
        return sorted(len(f.edges) for f in self.faces)


@dataclass
class CellComplex3:
    """Cone over the ideal boundary complex; the apex is the ball origin"""
    base: CellComplex2
    apex: ProjectivePoint

    @property
    def counts(self) -> Tuple[int, int, int, int]:
        v, e, f = len(self.base.vertices), len(self.base.edges), len(self.base.faces)
        return v + 1, e + v, f + e, f

    @property
    def sides(self) -> List[str]:
        return [face.label for face in self.base.faces]

    @property
    def euler(self) -> int:
        v, e, f, c = self.counts
        return v - e + f - c


def reduce_word(word: Sequence[Tuple[str, int]], n: int) -> Word:
    """Normal form in <A, B | B^n>: merge neighbours, B exponents mod n, drop trivial letters"""
    out: List[Tuple[str, int]] = []
    for gen, exp in word:
        if out and out[-1][0] == gen:
            exp += out.pop()[1]
        if gen == "B":
            exp %= n
        if exp:
            out.append((gen, exp))
    return tuple(out)


def conjugate_by_a(k: int, word: Sequence[Tuple[str, int]]) -> List[Tuple[str, int]]:
    """A^k word A^-k"""
    return [("A", k), *word, ("A", -k)]


class FordCellService:
    """Combinatorics of the ideal boundary of D_n and its numerical confirmation"""

    # Complexes

    def face_list(self, n: int) -> List[Face]:
        """Polygons of the ideal boundary, each with its counter-clockwise edge cycle"""
        _check(InputValidator.validate_triangle_order(n))
        m = n - 1
        e = lambda j, k: edge_key(j, k)
        ep = lambda j, k: edge_key(j, k, True)
        middle = range(2, n - 1)
        faces = [
            Face("f1", 1, [e(1, m)] + [ep(1, j) for j in middle] + [ep(1, m)] + [e(1, j) for j in middle]),
            Face(f"f{m}", m, [ep(1, m)] + [ep(m, j) for j in reversed(middle)]
                 + [e(1, m)] + [e(m, j) for j in reversed(middle)]),
        ]
        if n == 4:
            faces += [Face("f2", 2, [e(1, 2), e(3, 2)]), Face("f'2", 2, [ep(1, 2), ep(3, 2)])]
        elif n >= 5:
            faces += [
                Face("f2", 2, [e(1, 2), e(m, 2), e(2, 3)]),
                Face("f'2", 2, [ep(1, 2), ep(m, 2), ep(2, 3)]),
                Face(f"f{n - 2}", n - 2, [e(m, n - 2), e(1, n - 2), e(n - 3, n - 2)]),
                Face(f"f'{n - 2}", n - 2, [ep(m, n - 2), ep(1, n - 2), ep(n - 3, n - 2)]),
            ]
            for k in range(3, n - 2):
                faces += [
                    Face(f"f{k}", k, [e(1, k), e(k - 1, k), e(m, k), e(k, k + 1)]),
                    Face(f"f'{k}", k, [ep(1, k), ep(k - 1, k), ep(m, k), ep(k, k + 1)]),
                ]
        return faces

    def _synthesize_vertices(self, n: int, faces: List[Face]) -> CellComplex2:
        """Corner (face, i) starts edge i of the face; glued edges run in opposite directions"""
        complex2 = CellComplex2(n=n, faces=faces)
        uf = UnionFind((idx, i) for idx, face in enumerate(faces) for i in range(len(face.edges)))
        for key, owners in complex2.edges.items():
            if len(owners) != 2 or owners[0] == owners[1]:
                raise validation_error(f"Edge {edge_label(key)} must border exactly two faces",
                                       {"faces": [faces[o].label for o in owners]})
            ends = []
            for idx in owners:
                size = len(faces[idx].edges)
                for i, other in enumerate(faces[idx].edges):
                    if other == key:
                        ends.append(((idx, i), (idx, (i + 1) % size)))
            (s1, t1), (s2, t2) = ends
            uf.union(s1, t2)
            uf.union(t1, s2)
        complex2.vertices = sorted((frozenset(c) for c in uf.to_sets()), key=lambda c: min(c))
        return complex2

    def build_ideal_boundary_complex(self, n: int) -> CellComplex2:
        """
        The 2-sphere bounding the ideal boundary of D_n.

        Raises:
            ValidationError: n < 3
        """
        complex2 = self._synthesize_vertices(n, self.face_list(n))
        logger.debug("ideal boundary complex n=%d: V=%d E=%d F=%d", n,
                     len(complex2.vertices), len(complex2.edges), len(complex2.faces))
        return complex2

    def mirror_complex(self, base: CellComplex2) -> CellComplex2:
        """Second gluing of f1 and f_{n-1}: every face other than f1 exchanges primed and plain edges"""
        swapped = [Face(f.label, f.sphere,
                        f.edges if f.label == "f1" else [(not p, j, k) for p, j, k in f.edges])
                   for f in base.faces]
        return self._synthesize_vertices(base.n, swapped)

    def face_graph(self, complex2: CellComplex2) -> nx.MultiGraph:
        """Faces as nodes, one graph edge per shared cell edge"""
        g = nx.MultiGraph()
        for idx, face in enumerate(complex2.faces):
            g.add_node(idx, sphere=face.sphere, degree=len(face.edges))
        for key, owners in complex2.edges.items():
            g.add_edge(owners[0], owners[1], circle=(key[1], key[2]))
        return g

    def gluings_isomorphic(self, n: int) -> bool:
        """Both gluing choices give isomorphic complexes"""
        base = self.build_ideal_boundary_complex(n)
        mirror = self.mirror_complex(base)
        if (len(base.vertices), base.euler) != (len(mirror.vertices), mirror.euler):
            return False
        return nx.is_isomorphic(
            self.face_graph(base), self.face_graph(mirror),
            node_match=lambda a, b: a["sphere"] == b["sphere"] and a["degree"] == b["degree"],
            edge_match=lambda a, b: sorted(d["circle"] for d in a.values())
            == sorted(d["circle"] for d in b.values()),
        )

    def cone_complex(self, base: CellComplex2) -> CellComplex3:
        """One 3-cell per base face, every base vertex joined to [0,0,1]"""
        return CellComplex3(base=base, apex=ProjectivePoint(np.array([0.0, 0.0, 1.0]), BALL))

    def to_json(self, complex2: CellComplex2) -> FordComplexDocument:
        edges = complex2.edges
        corner_edges = {}
        for idx, face in enumerate(complex2.faces):
            size = len(face.edges)
            for i in range(size):
                corner_edges[(idx, i)] = (face.edges[i - 1], face.edges[i])
        vertices = []
        for number, cls in enumerate(complex2.vertices, start=1):
            incident = sorted({edge_label(k) for c in cls for k in corner_edges[c]})
            vertices.append(VertexRecord(label=f"v{number}", edges=incident))
        return FordComplexDocument(
            n=complex2.n,
            faces=[FaceRecord(label=f.label, edges=[edge_label(k) for k in f.edges]) for f in complex2.faces],
            edges=[EdgeRecord(label=edge_label(k), faces=[complex2.faces[o].label for o in owners])
                   for k, owners in sorted(edges.items())],
            vertices=vertices,
            euler=complex2.euler,
        )

    # Cycles

    def _apply(self, indices: Sequence[int], m: int, n: int) -> Tuple[int, ...]:
        """B^m(I(B^m) cap I(B^a)) = I(B^-m) cap I(B^(a-m)), indices mod n"""
        m %= n
        if m not in {i % n for i in indices}:
            raise validation_error("Side pairing must use one of the intersecting spheres")
        return tuple(sorted((-m) % n if i % n == m else (i - m) % n for i in indices))

    def ridge_cycles(self, n: int, k: int = 0) -> List[dict]:
        """
        Triangle cycles I_{-1} cap I_{-j} -> I_1 cap I_{-(j-1)} -> I_j cap I_{j-1} -> back,
        j = 2..n-1, with the composed word reduced in <A, B | B^n>.
        """
        _check(InputValidator.validate_triangle_order(n))
        cycles = []
        for j in range(2, n):
            start = tuple(sorted(((-1) % n, (-j) % n)))
            steps, current, word = [], start, []
            for m in (-1, -(j - 1), j):
                target = self._apply(current, m, n)
                steps.append({"from": current, "to": target,
                              "word": reduce_word(conjugate_by_a(k, [("B", m)]), n)})
                word = conjugate_by_a(k, [("B", m)]) + word
                current = target
            cycles.append({"j": j, "k": k, "steps": steps, "closed": current == start,
                           "product": reduce_word(word, n)})
        return cycles

    def ideal_vertex_cycles(self, n: int, k: int = 0) -> List[dict]:
        """
        Triple-intersection diagrams for j = 1..n-3. Each arrow's target is recomputed from
        the side pairing rule, and the diagram is consistent when B-exponent potentials exist.
        """
        _check(InputValidator.validate_triangle_order(n))
        results = []
        for j in range(1, n - 2):
            nodes = {
                "P": tuple(sorted(i % n for i in (1, j + 1, j + 2))),
                "Q": tuple(sorted(i % n for i in (1, -j, -(j + 1)))),
                "R": tuple(sorted(i % n for i in (-1, -(j + 1), -(j + 2)))),
                "S": tuple(sorted(i % n for i in (-1, j, j + 1))),
            }
            arrows = [("P", "Q", j + 1), ("P", "R", j + 2), ("R", "Q", -1),
                      ("S", "R", j + 1), ("S", "P", -1), ("S", "Q", j)]
            g = nx.DiGraph()
            matches = True
            for src, dst, m in arrows:
                matches &= self._apply(nodes[src], m, n) == nodes[dst]
                g.add_edge(src, dst, exponent=m)
            potentials = {"S": 0}
            for u, v in nx.bfs_edges(g.to_undirected(as_view=True), "S"):
                potentials[v] = self._step(g, u, v, potentials[u], n)
            consistent = all((potentials[u] + data["exponent"] - potentials[v]) % n == 0
                             for u, v, data in g.edges(data=True))
            results.append({"j": j, "k": k, "nodes": nodes, "targets_match": bool(matches),
                            "consistent": bool(consistent)})
        return results

    @staticmethod
    def _step(g: nx.DiGraph, u, v, potential: int, n: int) -> int:
        if g.has_edge(u, v):
            return (potential + g[u][v]["exponent"]) % n
        return (potential - g[v][u]["exponent"]) % n

    def tangency_orbit(self, n: int, k_max: int = 3) -> List[bool]:
        """A^{k+1} B^-1 A^-(k+1) conjugates A^k(AB)A^-k into A^{k+1}(AB)A^-(k+1)"""
        checks = []
        for k in range(-k_max, k_max + 1):
            g = conjugate_by_a(k + 1, [("B", -1)])
            g_inv = conjugate_by_a(k + 1, [("B", 1)])
            source = conjugate_by_a(k, [("A", 1), ("B", 1)])
            target = conjugate_by_a(k + 1, [("A", 1), ("B", 1)])
            checks.append(reduce_word(g + source + g_inv, n) == reduce_word(target, n))
        return checks

    # Numerical probe

    def _sphere_samples(self, theta: float, side: int):
        """Ideal points of I(theta) on an (alpha, phi) grid plus the two poles, as ball lifts"""
        sphere = ellip_service.tilde_sphere(Q0, theta)
        frame_inv = np.linalg.inv(heis_service.frame_matrix(Q_BALL))
        alphas = -np.pi / 2 + np.pi * (np.arange(side) + 0.5) / side
        phis = TWO_PI * np.arange(side) / side
        aa, pp = np.meshgrid(alphas, phis, indexing="ij")
        grid = np.concatenate([aa.ravel(), [-np.pi / 2, np.pi / 2]])
        phase = np.concatenate([pp.ravel(), [0.0, 0.0]])
        lifts = heis_service.ideal_geographic_lifts(grid, phase, sphere.radius, sphere.center)
        ball = lifts @ frame_inv.T
        return ball[:, :2] / ball[:, 2:3]

    def numeric_cell_probe(self, n: int, samples: Optional[int] = None) -> ProbeReport:
        """
        Sample each ideal sphere, keep the points outside all other spheres, and compare the
        connected components with the faces of the combinatorial complex.
        """
        _check(InputValidator.validate_triangle_order(n))
        start = time.time()
        side = max(20, int(round((samples or settings.probe_samples) ** 0.5)))
        noise = settings.probe_noise_threshold
        thetas = {k: TWO_PI * k / n for k in range(1, n)}
        complex2 = self.build_ideal_boundary_complex(n)
        expected_faces = {k: sum(1 for f in complex2.faces if f.sphere == k) for k in thetas}
        expected_bounds = sorted((f.sphere, tuple(sorted({j if j != f.sphere else k for _, j, k in f.edges})))
                                 for f in complex2.faces)
        found_faces: Dict[int, int] = {}
        found_bounds = []
        dropped = 0
        worst_on_sphere = 0.0
        for k, theta in thetas.items():
            w = self._sphere_samples(theta, side)
            worst_on_sphere = max(worst_on_sphere,
                                  float(np.abs(isect_service.standard_sphere_residuals(w, theta)).max()))
            others = [j for j in thetas if j != k]
            signs = np.stack([isect_service.standard_sphere_residuals(w, thetas[j]) > 0 for j in others],
                             axis=1)
            outside_all = signs.all(axis=1)
            g = self._grid_graph(side)
            g.remove_nodes_from([i for i in range(len(w)) if not outside_all[i]])
            count = 0
            for component in nx.connected_components(g):
                if len(component) < noise:
                    dropped += 1
                    continue
                count += 1
                bounds = set()
                for node in component:
                    for nb in self._grid_neighbours(node, side):
                        blocked = [others[c] for c in np.flatnonzero(~signs[nb])]
                        if len(blocked) == 1:
                            bounds.add(blocked[0])
                found_bounds.append((k, tuple(sorted(bounds))))
            found_faces[k] = count
        found_bounds.sort()
        report = ProbeReport(
            n=n, samples=side * side, faces_per_sphere=found_faces,
            expected_faces_per_sphere=expected_faces,
            adjacency_matches=found_bounds == expected_bounds,
            max_on_sphere_residual=worst_on_sphere, dropped_components=dropped,
            details={"found": [list(b) for b in found_bounds], "expected": [list(b) for b in expected_bounds]},
        )
        AuditLogger.log_computation(
            operation="numeric_cell_probe",
            data_type="ford_complex",
            record_count=side * side * (n - 1),
            processing_time_ms=int((time.time() - start) * 1000),
            additional_data={"n": n, "agrees": report.agrees},
        )
        return report

    @staticmethod
    def _grid_neighbours(node: int, side: int) -> List[int]:
        poles = (side * side, side * side + 1)
        if node == poles[0]:
            return list(range(side))
        if node == poles[1]:
            return [(side - 1) * side + i for i in range(side)]
        a, p = divmod(node, side)
        out = [a * side + (p + 1) % side, a * side + (p - 1) % side]
        out.append((a - 1) * side + p if a > 0 else poles[0])
        out.append((a + 1) * side + p if a < side - 1 else poles[1])
        return out

    def _grid_graph(self, side: int) -> nx.Graph:
        """Sphere grid: phi periodic, first and last alpha rows attached to the poles"""
        g = nx.Graph()
        g.add_nodes_from(range(side * side + 2))
        for node in range(side * side + 2):
            for nb in self._grid_neighbours(node, side):
                g.add_edge(node, nb)
        return g

    def beside_containment_check(self, theta1: float, theta3: float, theta4: float, theta5: float,
                                 theta2: float, samples: int = 256) -> Tuple[int, int]:
        """
        Ideal points of I(theta3) cap I(theta5) outside I(theta1) and I(theta2) lie inside
        I(theta4) when theta1 < theta3 < theta4 < theta5 < theta2.

        Returns:
            (points tested, violations)
        """
        if not theta1 < theta3 < theta4 < theta5 < theta2:
            raise validation_error("Angles must satisfy theta1 < theta3 < theta4 < theta5 < theta2")
        wc = isect_service.w_coefficients(theta3, theta5)
        tested = violations = 0
        for angle in np.linspace(0.0, TWO_PI, samples, endpoint=False):
            dx, dy = np.cos(angle), np.sin(angle)
            s = isect_service._ray_exit(wc, dx, dy)
            x, y = s * dx, s * dy
            omega = isect_service.ball_from_psi(2 * np.arctan2(1.0, x), 2 * np.arctan2(1.0, y),
                                                theta3, theta5)
            w = omega.standard_lift()[None, :2]
            if (isect_service.standard_sphere_residuals(w, theta1)[0] <= settings.tol
                    or isect_service.standard_sphere_residuals(w, theta2)[0] <= settings.tol):
                continue
            tested += 1
            if isect_service.standard_sphere_residuals(w, theta4)[0] >= 0:
                violations += 1
        return tested, violations


# Global service instance
fordcell_service = FordCellService()
