#!/usr/bin/env python3
"""Regenerates the bundled country fixtures under fixtures/.

Region boundaries are simplified: each landmass outline is partitioned into
Voronoi cells around approximate region centroids, and city regions are cut
out of their neighbours as small hexagons. Flow magnitudes follow a seeded
gravity model. Grid assignments (OD Maps) come from a least-squares
assignment of centroids to grid cells and were then checked by hand.

Usage: python3 tools/fixtures/make_fixtures.py [out_dir]
"""

import json
import math
import random
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import Voronoi
from shapely.geometry import MultiPolygon, Polygon, box, mapping
from shapely.ops import unary_union

# ---------------------------------------------------------------------------
# Country definitions: landmasses, regions (id, name, lon, lat, landmass) and
# city regions (id, name, lon, lat, radius in degrees).

AU_MAIN = [(113.4, -22.0), (114.2, -21.8), (116.7, -20.6), (121.0, -19.5), (122.2, -17.0),
           (125.2, -14.5), (128.0, -15.0), (129.5, -14.9), (130.2, -12.9), (132.6, -11.5),
           (135.2, -12.2), (136.8, -12.2), (135.5, -14.7), (139.3, -17.4), (140.8, -17.4),
           (141.6, -12.6), (142.5, -10.7), (143.6, -14.0), (145.3, -15.0), (146.3, -19.0),
           (149.2, -21.0), (150.9, -22.6), (153.1, -25.0), (153.6, -28.2), (153.0, -31.0),
           (151.3, -33.9), (150.0, -37.5), (147.9, -37.9), (146.3, -39.1), (144.9, -37.9),
           (143.5, -38.8), (140.6, -38.0), (139.6, -37.0), (138.0, -35.6), (138.5, -34.5),
           (137.8, -32.6), (137.0, -33.5), (135.9, -34.8), (134.2, -32.6), (131.1, -31.5),
           (126.0, -32.3), (123.5, -33.9), (117.9, -35.1), (115.0, -34.3), (115.7, -31.6),
           (114.9, -29.0), (113.3, -26.0)]
AU_TAS = [(144.6, -40.7), (148.3, -40.9), (148.3, -42.2), (147.0, -43.6), (145.2, -42.3)]

NZ_NORTH = [(172.7, -34.4), (174.3, -35.3), (174.9, -36.9), (175.9, -36.6), (176.2, -37.6),
            (177.5, -37.9), (178.5, -37.7), (178.3, -38.6), (177.9, -39.2), (176.9, -39.5),
            (176.2, -40.5), (175.3, -41.6), (174.6, -41.3), (175.2, -40.2), (174.3, -39.8),
            (173.8, -39.3), (174.6, -38.8), (174.8, -37.8), (174.4, -36.9), (173.9, -36.1),
            (173.0, -35.2)]
NZ_SOUTH = [(172.7, -40.5), (173.9, -40.9), (174.3, -41.7), (173.6, -42.6), (172.8, -43.4),
            (173.1, -43.8), (172.2, -43.9), (171.2, -44.5), (170.8, -45.8), (169.6, -46.6),
            (168.3, -46.6), (166.5, -46.0), (166.8, -45.2), (168.0, -44.0), (169.9, -43.2),
            (171.3, -42.1), (171.8, -41.0)]

DE_MAIN = [(6.0, 51.8), (6.8, 52.1), (7.0, 52.6), (7.2, 53.3), (8.0, 53.6), (8.9, 53.9),
           (8.6, 54.9), (9.9, 54.8), (11.0, 54.4), (12.5, 54.5), (14.2, 53.9), (14.4, 53.2),
           (14.6, 52.6), (14.7, 51.6), (15.0, 51.1), (14.3, 50.9), (12.9, 50.4), (12.1, 50.3),
           (12.5, 49.8), (13.8, 48.8), (13.0, 48.2), (12.9, 47.6), (10.5, 47.5), (9.6, 47.6),
           (7.6, 47.6), (7.6, 48.1), (8.2, 49.0), (6.4, 49.5), (6.4, 50.3), (5.9, 50.8)]

CN_MAIN = [(73.5, 39.5), (75.0, 37.0), (78.0, 35.5), (79.0, 32.5), (81.0, 30.0), (85.0, 28.3),
           (88.0, 27.9), (92.0, 27.8), (97.0, 28.3), (98.5, 25.0), (97.6, 24.0), (99.5, 22.1),
           (101.5, 21.2), (103.0, 22.5), (106.5, 22.0), (108.0, 21.6), (110.0, 21.0),
           (110.5, 20.3), (111.5, 21.5), (114.0, 22.2), (116.5, 22.9), (119.0, 25.0),
           (120.0, 26.8), (121.9, 29.9), (121.0, 30.8), (121.9, 31.8), (120.3, 34.3),
           (119.2, 35.0), (120.8, 36.5), (122.5, 37.4), (121.0, 37.8), (119.0, 37.2),
           (118.0, 38.4), (117.7, 39.0), (119.5, 39.9), (121.5, 40.8), (122.0, 39.2),
           (124.3, 39.9), (126.0, 41.0), (128.1, 41.9), (130.6, 42.4), (131.3, 44.9),
           (133.0, 44.9), (134.7, 48.3), (132.5, 47.7), (130.9, 47.9), (127.5, 49.8),
           (126.0, 52.8), (123.5, 53.5), (120.8, 53.3), (119.9, 51.2), (117.0, 49.6),
           (116.0, 47.9), (119.0, 46.7), (117.0, 46.6), (114.5, 45.4), (112.0, 45.1),
           (110.6, 42.7), (107.0, 42.4), (104.9, 41.7), (100.8, 42.6), (96.5, 42.8),
           (95.5, 44.3), (91.0, 45.2), (90.7, 47.7), (87.8, 49.2), (85.8, 47.6), (82.7, 45.4),
           (80.3, 45.0), (80.0, 42.6), (77.0, 41.0)]
CN_HAINAN = [(108.6, 19.2), (109.6, 18.2), (110.5, 18.8), (111.0, 19.7), (110.5, 20.1),
             (109.3, 20.0)]
CN_TAIWAN = [(120.1, 23.0), (120.8, 22.0), (121.6, 23.4), (122.0, 25.0), (121.0, 25.1)]

US_MAIN = [(-124.7, 48.4), (-123.0, 49.0), (-95.2, 49.0), (-94.8, 49.4), (-89.6, 48.0),
           (-84.8, 46.9), (-82.4, 45.3), (-82.5, 43.0), (-83.1, 42.0), (-79.0, 42.9),
           (-76.3, 43.6), (-74.9, 45.0), (-71.5, 45.0), (-70.0, 46.7), (-69.2, 47.4),
           (-67.8, 47.1), (-66.9, 44.8), (-70.0, 43.7), (-70.8, 42.3), (-70.0, 41.7),
           (-71.9, 41.3), (-74.0, 40.5), (-74.1, 39.6), (-75.0, 38.8), (-75.9, 37.0),
           (-75.5, 35.2), (-76.6, 34.6), (-78.5, 33.8), (-80.9, 32.0), (-81.4, 30.4),
           (-80.0, 26.8), (-80.4, 25.2), (-81.7, 25.9), (-82.8, 28.0), (-82.7, 29.2),
           (-84.3, 30.1), (-86.5, 30.4), (-89.6, 30.2), (-89.4, 29.0), (-91.0, 29.2),
           (-93.8, 29.7), (-95.0, 29.2), (-97.4, 27.4), (-97.2, 25.9), (-99.2, 26.5),
           (-101.4, 29.8), (-103.0, 29.0), (-104.7, 29.9), (-106.5, 31.8), (-108.2, 31.8),
           (-111.1, 31.3), (-114.8, 32.5), (-117.1, 32.5), (-118.5, 34.0), (-120.6, 34.6),
           (-121.9, 36.6), (-122.5, 37.8), (-123.8, 39.8), (-124.2, 41.9), (-124.1, 43.7),
           (-124.0, 46.3)]
US_ALASKA = [(-141.0, 69.6), (-156.5, 71.3), (-166.0, 68.8), (-163.5, 66.6), (-168.0, 65.6),
             (-164.5, 63.0), (-166.0, 61.5), (-162.0, 58.6), (-158.0, 58.6), (-163.5, 55.0),
             (-155.0, 57.5), (-152.0, 60.5), (-148.0, 60.0), (-144.0, 60.0), (-141.0, 60.3)]
US_HAWAII_BIG = [(-155.9, 20.2), (-155.0, 19.7), (-155.1, 19.3), (-155.6, 18.9), (-156.0, 19.4)]
US_HAWAII_MAUI = [(-156.7, 21.0), (-156.0, 20.9), (-156.1, 20.6), (-156.5, 20.6)]

COUNTRIES = {
    "au": {
        "landmasses": {"main": [AU_MAIN], "tas": [AU_TAS]},
        "regions": [
            ("WA", "Western Australia", 122.0, -25.5, "main"),
            ("NT", "Northern Territory", 133.5, -19.5, "main"),
            ("SA", "South Australia", 135.5, -30.0, "main"),
            ("QLD", "Queensland", 144.5, -22.5, "main"),
            ("NSW", "New South Wales", 146.5, -32.5, "main"),
            ("VIC", "Victoria", 144.3, -37.0, "main"),
            ("TAS", "Tasmania", 146.6, -42.0, "tas"),
        ],
        "cities": [("ACT", "Australian Capital Territory", 149.1, -35.45, 0.45)],
    },
    "nz": {
        "landmasses": {"north": [NZ_NORTH], "south": [NZ_SOUTH]},
        "regions": [
            ("NTL", "Northland", 173.8, -35.5, "north"),
            ("AUK", "Auckland", 174.8, -36.9, "north"),
            ("WKO", "Waikato", 175.3, -37.9, "north"),
            ("BOP", "Bay of Plenty", 176.7, -38.2, "north"),
            ("GIS", "Gisborne", 177.9, -38.3, "north"),
            ("HKB", "Hawke's Bay", 176.7, -39.5, "north"),
            ("TKI", "Taranaki", 174.3, -39.3, "north"),
            ("MWT", "Manawatu-Whanganui", 175.5, -39.8, "north"),
            ("WGN", "Wellington", 175.4, -41.1, "north"),
            ("TAS", "Tasman", 172.7, -41.4, "south"),
            ("NSN", "Nelson", 173.3, -41.3, "south"),
            ("MBH", "Marlborough", 173.6, -41.7, "south"),
            ("WTC", "West Coast", 171.3, -42.5, "south"),
            ("CAN", "Canterbury", 172.0, -43.5, "south"),
            ("OTA", "Otago", 169.8, -45.3, "south"),
            ("STL", "Southland", 168.2, -45.8, "south"),
        ],
        "cities": [],
    },
    "de": {
        "landmasses": {"main": [DE_MAIN]},
        "regions": [
            ("SH", "Schleswig-Holstein", 9.8, 54.2, "main"),
            ("MV", "Mecklenburg-Vorpommern", 12.5, 53.8, "main"),
            ("NI", "Niedersachsen", 9.2, 52.8, "main"),
            ("BB", "Brandenburg", 13.6, 52.2, "main"),
            ("ST", "Sachsen-Anhalt", 11.7, 52.0, "main"),
            ("NW", "Nordrhein-Westfalen", 7.6, 51.5, "main"),
            ("HE", "Hessen", 9.0, 50.6, "main"),
            ("TH", "Thueringen", 11.0, 50.9, "main"),
            ("SN", "Sachsen", 13.3, 51.0, "main"),
            ("RP", "Rheinland-Pfalz", 7.4, 49.9, "main"),
            ("SL", "Saarland", 6.95, 49.4, "main"),
            ("BW", "Baden-Wuerttemberg", 9.0, 48.6, "main"),
            ("BY", "Bayern", 11.4, 48.9, "main"),
        ],
        "cities": [
            ("BE", "Berlin", 13.4, 52.5, 0.25),
            ("HB", "Bremen", 8.8, 53.1, 0.12),
            ("HH", "Hamburg", 10.0, 53.55, 0.2),
        ],
    },
    "cn": {
        "landmasses": {"main": [CN_MAIN], "hainan": [CN_HAINAN], "taiwan": [CN_TAIWAN]},
        "regions": [
            ("HE", "Hebei", 115.5, 38.5, "main"),
            ("SX", "Shanxi", 112.3, 37.6, "main"),
            ("NM", "Inner Mongolia", 113.0, 43.5, "main"),
            ("LN", "Liaoning", 122.6, 41.3, "main"),
            ("JL", "Jilin", 126.2, 43.7, "main"),
            ("HL", "Heilongjiang", 127.9, 47.8, "main"),
            ("JS", "Jiangsu", 119.5, 33.0, "main"),
            ("ZJ", "Zhejiang", 120.1, 29.2, "main"),
            ("AH", "Anhui", 117.2, 31.8, "main"),
            ("FJ", "Fujian", 118.0, 26.0, "main"),
            ("JX", "Jiangxi", 115.7, 27.6, "main"),
            ("SD", "Shandong", 118.2, 36.4, "main"),
            ("HA", "Henan", 113.6, 33.9, "main"),
            ("HB", "Hubei", 112.3, 31.0, "main"),
            ("HN", "Hunan", 111.7, 27.6, "main"),
            ("GD", "Guangdong", 113.4, 23.4, "main"),
            ("GX", "Guangxi", 108.8, 23.8, "main"),
            ("CQ", "Chongqing", 107.8, 30.0, "main"),
            ("SC", "Sichuan", 102.7, 30.6, "main"),
            ("GZ", "Guizhou", 106.9, 26.8, "main"),
            ("YN", "Yunnan", 101.5, 25.0, "main"),
            ("XZ", "Tibet", 88.4, 31.5, "main"),
            ("SN", "Shaanxi", 108.9, 35.2, "main"),
            ("GS", "Gansu", 102.5, 37.5, "main"),
            ("QH", "Qinghai", 96.0, 35.7, "main"),
            ("NX", "Ningxia", 106.2, 37.3, "main"),
            ("XJ", "Xinjiang", 85.0, 41.5, "main"),
            ("HI", "Hainan", 109.8, 19.2, "hainan"),
            ("TW", "Taiwan", 121.0, 23.7, "taiwan"),
        ],
        "cities": [
            ("BJ", "Beijing", 116.4, 40.0, 0.5),
            ("TJ", "Tianjin", 117.3, 39.2, 0.4),
            ("SH", "Shanghai", 121.45, 31.2, 0.35),
            ("HK", "Hong Kong", 114.17, 22.4, 0.15),
            ("MO", "Macau", 113.55, 22.25, 0.08),
        ],
    },
    "us": {
        "landmasses": {"main": [US_MAIN], "ak": [US_ALASKA],
                       "hi": [US_HAWAII_BIG, US_HAWAII_MAUI]},
        "regions": [
            ("AL", "Alabama", -86.8, 32.8), ("AZ", "Arizona", -111.7, 34.3),
            ("AR", "Arkansas", -92.4, 34.9), ("CA", "California", -119.5, 37.2),
            ("CO", "Colorado", -105.5, 39.0), ("CT", "Connecticut", -72.7, 41.6),
            ("DE", "Delaware", -75.5, 39.0), ("FL", "Florida", -81.7, 28.6),
            ("GA", "Georgia", -83.4, 32.7), ("ID", "Idaho", -114.6, 44.4),
            ("IL", "Illinois", -89.2, 40.0), ("IN", "Indiana", -86.3, 39.9),
            ("IA", "Iowa", -93.5, 42.1), ("KS", "Kansas", -98.4, 38.5),
            ("KY", "Kentucky", -85.3, 37.5), ("LA", "Louisiana", -92.0, 31.0),
            ("ME", "Maine", -69.2, 45.4), ("MD", "Maryland", -76.8, 39.3),
            ("MA", "Massachusetts", -71.8, 42.3), ("MI", "Michigan", -84.7, 43.6),
            ("MN", "Minnesota", -94.3, 46.3), ("MS", "Mississippi", -89.7, 32.7),
            ("MO", "Missouri", -92.5, 38.4), ("MT", "Montana", -109.6, 47.0),
            ("NE", "Nebraska", -99.8, 41.5), ("NV", "Nevada", -116.6, 39.3),
            ("NH", "New Hampshire", -71.6, 43.7), ("NJ", "New Jersey", -74.7, 40.1),
            ("NM", "New Mexico", -106.1, 34.4), ("NY", "New York", -75.5, 42.9),
            ("NC", "North Carolina", -79.4, 35.6), ("ND", "North Dakota", -100.5, 47.5),
            ("OH", "Ohio", -82.8, 40.3), ("OK", "Oklahoma", -97.5, 35.6),
            ("OR", "Oregon", -120.5, 43.9), ("PA", "Pennsylvania", -77.8, 40.9),
            ("RI", "Rhode Island", -71.5, 41.7), ("SC", "South Carolina", -80.9, 33.9),
            ("SD", "South Dakota", -100.2, 44.4), ("TN", "Tennessee", -86.3, 35.9),
            ("TX", "Texas", -99.3, 31.5), ("UT", "Utah", -111.7, 39.3),
            ("VT", "Vermont", -72.7, 44.1), ("VA", "Virginia", -78.8, 37.5),
            ("WA", "Washington", -120.4, 47.4), ("WV", "West Virginia", -80.6, 38.6),
            ("WI", "Wisconsin", -89.8, 44.6), ("WY", "Wyoming", -107.6, 43.0),
            ("AK", "Alaska", -152.0, 64.0, "ak"), ("HI", "Hawaii", -155.5, 19.6, "hi"),
        ],
        "cities": [("DC", "District of Columbia", -77.03, 38.9, 0.12)],
    },
}

# Hand-tuned OD Maps grid for Australia; the others use the assignment solver.
AU_GRID = {"WA": [0, 1], "NT": [1, 0], "SA": [1, 1], "QLD": [2, 0], "NSW": [2, 1],
           "ACT": [3, 2], "VIC": [2, 2], "TAS": [2, 3], "gridSize": [4, 4]}


def voronoi_cells(points, clip):
    """Voronoi cells of `points` clipped to the polygon `clip`."""
    if len(points) == 1:
        return [clip]
    pts = np.asarray(points)
    minx, miny, maxx, maxy = clip.bounds
    span = max(maxx - minx, maxy - miny) * 10.0
    far = np.array([[minx - span, miny - span], [minx - span, maxy + span],
                    [maxx + span, miny - span], [maxx + span, maxy + span]])
    vor = Voronoi(np.vstack([pts, far]))
    cells = []
    for i in range(len(points)):
        region = vor.regions[vor.point_region[i]]
        assert -1 not in region and region
        cell = Polygon([vor.vertices[v] for v in region])
        cells.append(cell.intersection(clip))
    return cells


def hexagon(lon, lat, r):
    k = 1.0 / math.cos(math.radians(lat))
    return Polygon([(lon + r * k * math.cos(math.radians(60 * i + 30)),
                     lat + r * math.sin(math.radians(60 * i + 30))) for i in range(6)])


def rounded(geom):
    def ring(coords):
        out = [[round(x, 4), round(y, 4)] for x, y in coords]
        if out[0] != out[-1]:
            out.append(out[0])
        return out

    polys = [geom] if geom.geom_type == "Polygon" else list(geom.geoms)
    polys = [p for p in polys if p.geom_type == "Polygon" and p.area > 1e-6]
    polys.sort(key=lambda p: -p.area)
    coords = [[ring(p.exterior.coords)] + [ring(h.coords) for h in p.interiors] for p in polys]
    if len(coords) == 1:
        return {"type": "Polygon", "coordinates": coords[0]}
    return {"type": "MultiPolygon", "coordinates": coords}


def build_regions(spec):
    lands = {name: unary_union([Polygon(r) for r in rings])
             for name, rings in spec["landmasses"].items()}
    geoms = {}
    order = []
    for name, land in lands.items():
        members = [r for r in spec["regions"] if (r[4] if len(r) > 4 else "main") == name]
        cells = voronoi_cells([(r[2], r[3]) for r in members], land)
        for r, cell in zip(members, cells):
            geoms[r[0]] = cell
    country = unary_union(list(lands.values()))
    for cid, _, lon, lat, rad in spec["cities"]:
        city = hexagon(lon, lat, rad).intersection(country)
        for rid in list(geoms):
            geoms[rid] = geoms[rid].difference(city)
        geoms[cid] = city
    names = {r[0]: r[1] for r in spec["regions"]}
    names.update({c[0]: c[1] for c in spec["cities"]})
    order = sorted(geoms)
    return [(rid, names[rid], geoms[rid]) for rid in order]


def lonlat_distance_km(a, b):
    la1, la2 = math.radians(a[1]), math.radians(b[1])
    dl = math.radians(b[0] - a[0])
    c = math.sin(la1) * math.sin(la2) + math.cos(la1) * math.cos(la2) * math.cos(dl)
    return 6371.0 * math.acos(max(-1.0, min(1.0, c)))


def build_flows(regions, seed):
    rng = random.Random(seed)
    weights = {rid: math.exp(rng.gauss(0.0, 1.0)) for rid, _, _ in regions}
    centres = {rid: geom.representative_point().coords[0] for rid, _, geom in regions}
    rows = []
    for o, _, _ in regions:
        for d, _, _ in regions:
            if o == d:
                continue
            dist = lonlat_distance_km(centres[o], centres[d])
            base = 2000.0 * weights[o] * weights[d] / (1.0 + dist / 400.0)
            rows.append((o, d, int(round(base * rng.uniform(0.6, 1.4))) + 1))
    return rows


def build_grid(regions):
    n = len(regions)
    centres = np.array([geom.representative_point().coords[0] for _, _, geom in regions])
    lat0 = math.radians(float(np.mean(centres[:, 1])))
    xs = centres[:, 0] * math.cos(lat0)
    ys = centres[:, 1]
    aspect = (xs.max() - xs.min()) / max(ys.max() - ys.min(), 1e-9)
    cells = int(math.ceil(n * 1.35))
    w = max(1, int(round(math.sqrt(cells * aspect))))
    h = max(1, int(math.ceil(cells / w)))
    u = (xs - xs.min()) / max(xs.max() - xs.min(), 1e-9) * (w - 1)
    v = (ys.max() - ys) / max(ys.max() - ys.min(), 1e-9) * (h - 1)
    slots = [(c, r) for r in range(h) for c in range(w)]
    cost = np.array([[(u[i] - c) ** 2 + (v[i] - r) ** 2 for (c, r) in slots] for i in range(n)])
    rows, cols = linear_sum_assignment(cost)
    grid = {regions[i][0]: list(slots[j]) for i, j in zip(rows, cols)}
    grid["gridSize"] = [w, h]
    return grid


def main():
    out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
    for seed, (key, spec) in enumerate(sorted(COUNTRIES.items())):
        regions = build_regions(spec)
        d = out_dir / key
        d.mkdir(parents=True, exist_ok=True)
        features = []
        for rid, name, geom in regions:
            features.append({"type": "Feature",
                             "properties": {"id": rid, "name": name, "abbr": rid[:4]},
                             "geometry": rounded(geom)})
        with open(d / "regions.geojson", "w", newline="\n") as f:
            json.dump({"type": "FeatureCollection", "features": features}, f, indent=1)
            f.write("\n")
        with open(d / "flows.csv", "w", newline="\n") as f:
            f.write("origin,dest,magnitude\n")
            for o, dest, m in build_flows(regions, 1000 + seed):
                f.write(f"{o},{dest},{m}\n")
        grid = AU_GRID if key == "au" else build_grid(regions)
        with open(d / "grid.json", "w", newline="\n") as f:
            json.dump(grid, f, indent=1, sort_keys=True)
            f.write("\n")
        print(key, len(regions), "regions")


if __name__ == "__main__":
    main()
