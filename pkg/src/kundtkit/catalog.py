"""Built-in example metrics, stored in the metric-file format."""

from __future__ import annotations

from .errors import InputError
from .metricfile import MetricDocument, loads

_ENTRIES = {
    "minkowski": """
name: minkowski
description: flat space in null coordinates, 2 du dv + dx1^2 + dx2^2
chart: {coordinates: [u, v, x1, x2]}
metric:
  kundt: {H: '0', W: ['0', '0']}
vector_fields:
  k: {components: ['0', '1', '0', '0']}
  du: {components: ['1', '0', '0', '0']}
  boost: {components: ['-u', v, '0', '0']}
  null_rotation: {components: ['0', x1, '-u', '0']}
  rotation: {components: ['0', '0', '-x2', x1]}
sample_points: [[0, 0, 0, 0], [1, -1, 2, 3], [1/2, 2, -1, 1/3]]
settings: {mode: rational, invariants: [2, 3]}
""",
    "pp-wave": """
name: pp-wave
description: plane-fronted wave with H = x1^2 - x2^2 + u x1
chart: {coordinates: [u, v, x1, x2]}
metric:
  kundt: {H: 'x1^2 - x2^2 + u*x1', W: ['0', '0']}
vector_fields:
  k: {components: ['0', '1', '0', '0']}
  B: {normal_form: {A: '0', B: 'x1 + u*x2', C: ['0', '0']}}
sample_points: [[0, 1, 2, 0], [1, -1, 1, 2], [1/2, 2, 3, -1]]
settings: {mode: rational, invariants: [2, 3]}
""",
    "vsi": """
name: vsi
description: degenerate Kundt metric all of whose curvature invariants vanish
chart: {coordinates: [u, v, x1, x2], validity: ['x1 > 0']}
metric:
  kundt:
    degenerate:
      H2: 1/(2*x1^2)
      H1: u*x2
      H0: x1*x2
      W1: [-2/x1, '0']
      W0: ['0', u]
    gt: [['1', '0'], ['0', '1']]
vector_fields:
  k: {components: ['0', '1', '0', '0']}
  B: {normal_form: {A: '0', B: 'x1*u + x2^2', C: ['0', '0']}}
  translation: {normal_form: {A: '1', B: 'x1', C: ['0', '1']}}
deformations:
  generic: {P1: 'x1*u', P0: 'x2 + u^2', Q: [x1, 'u*x2'], t: [0, 1/2, 1]}
sample_points: [[0, 1, 2, 0], [1, -1, 1, 2], [1/2, 2, 3, -1], [-1, 1/3, 1, 1], [2, 0, 2, 1/2]]
settings: {mode: rational, invariants: [2, 3]}
""",
    "nonconstant-h2": """
name: nonconstant-h2
description: degenerate Kundt metric with H2 = x1^2, so its invariants depend on H2
chart: {coordinates: [u, v, x1, x2]}
metric:
  kundt:
    degenerate:
      H2: x1^2
      H1: x2
      H0: u*x1
      W1: ['0', '0']
      W0: ['0', x1]
    gt: [['1', '0'], ['0', '1']]
vector_fields:
  k: {components: ['0', '1', '0', '0']}
  du: {components: ['1', '0', '0', '0']}
  dx2: {components: ['0', '0', '0', '1']}
  dx1: {components: ['0', '0', '1', '0']}
deformations:
  generic: {P1: 'x1*u', P0: 'x2 + u^2', Q: [x1, 'u*x2'], t: [0, 1/2, 1]}
  v2_control: {P1: '0', P0: '0', Q: ['0', '0'], P2: '1', t: [0, 1/2, 1]}
  dx1dx1_control: {P1: '0', P0: '0', Q: ['0', '0'], gt: [['x2^2', '0'], ['0', '0']], t: [0, 1/2, 1]}
sample_points: [[0, 1, 2, 0], [1, -1, 1, 2], [1/2, 2, 3, -1], [-1, 1/3, 1, 1], [2, 0, 2, 1/2]]
settings: {mode: rational, invariants: [2, 3]}
""",
    "schwarzschild": """
name: schwarzschild
description: Schwarzschild with M = 1 in static coordinates; not a Kundt chart
chart: {coordinates: [t, r, th, ph], validity: ['r > 2', 'th > 0', 'th < 3']}
metric:
  components:
    - ['-(1 - 2/r)', '0', '0', '0']
    - ['0', '1/(1 - 2/r)', '0', '0']
    - ['0', '0', 'r^2', '0']
    - ['0', '0', '0', 'r^2*sin(th)^2']
sample_points: [[0, 5/2, 1, 0], [0, 3, 1, 0], [0, 4, 1, 0]]
settings: {mode: float, invariants: [2, 3]}
""",
    "schwarzschild-ef": """
name: schwarzschild-ef
description: Schwarzschild with M = 1 in ingoing Eddington-Finkelstein coordinates
chart: {coordinates: [w, r, th, ph], validity: ['r > 0', 'th > 0', 'th < 3']}
metric:
  components:
    - ['-(1 - 2/r)', '1', '0', '0']
    - ['1', '0', '0', '0']
    - ['0', '0', 'r^2', '0']
    - ['0', '0', '0', 'r^2*sin(th)^2']
sample_points: [[0, 5/2, 1, 0], [0, 3, 1, 0], [0, 4, 1, 0]]
settings: {mode: float, invariants: [2, 3]}
""",
}


def names() -> list[str]:
    return list(_ENTRIES)


def text(name: str) -> str:
    if name not in _ENTRIES:
        raise InputError(f"unknown catalog entry {name!r}; known: {', '.join(_ENTRIES)}")
    return _ENTRIES[name].lstrip()


def get(name: str) -> MetricDocument:
    return loads(text(name))
