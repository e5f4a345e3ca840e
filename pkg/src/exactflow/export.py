"""Plain-text writers for sampled fields and traced curves."""

from __future__ import annotations

import csv
import io
import json

FLOAT_FMT = "%.17g"


def fmt(value):
    return FLOAT_FMT % value


def fields_csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def fields_json(columns, rows):
    return json.dumps({"columns": list(columns), "rows": [list(r) for r in rows]}, indent=1) + "\n"


def fields_vtk(title, dims, origin, spacing, rows, ncoords):
    """Legacy VTK STRUCTURED_POINTS (ASCII).

    ``rows`` are in x-fastest order with ``ncoords`` leading coordinate
    columns followed by u, v, w, rho, p. Missing dimensions are padded to 1.
    """
    dims = list(dims) + [1] * (3 - len(dims))
    origin = list(origin) + [0.0] * (3 - len(origin))
    spacing = list(spacing) + [1.0] * (3 - len(spacing))
    out = [
        "# vtk DataFile Version 3.0",
        title.replace("\n", " ")[:255],
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS " + " ".join(str(int(d)) for d in dims),
        "ORIGIN " + " ".join(fmt(o) for o in origin),
        "SPACING " + " ".join(fmt(s) for s in spacing),
        f"POINT_DATA {len(rows)}",
        "VECTORS velocity double",
    ]
    out += [" ".join(fmt(v) for v in r[ncoords:ncoords + 3]) for r in rows]
    for k, name in ((3, "rho"), (4, "p")):
        out += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        out += [fmt(r[ncoords + k]) for r in rows]
    return "\n".join(out) + "\n"
