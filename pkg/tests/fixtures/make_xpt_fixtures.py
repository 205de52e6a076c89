"""Regenerate the transport-file fixture corpus with the reference writer.

    python tests/fixtures/make_xpt_fixtures.py
"""
import json
import pathlib
import sys

HERE = pathlib.Path(__file__).parent
sys.path.insert(0, str(HERE.parent))

from xpt_oracle import ibm_decode, ibm_encode, write_xpt  # noqa: E402

NUM = "num"
CHAR = "char"


def corpus():
    return {
        "two_numeric": [("DATA", [("X", NUM, 8), ("Y", NUM, 8)],
                         [(1.0, 0.0), (-2.5, 3.25), (100.0, None)])],
        "short_numeric": [("SHORT", [("A", NUM, 3), ("B", NUM, 4), ("C", NUM, 8)],
                           [(1.0, 0.5, 1e-5), (1000.0, -255.0, 123456.789),
                            (2.0, 65535.0, -0.1)])],
        "missing": [("MISS", [("V", NUM, 8), ("W", NUM, 2)],
                     [(b".\0\0\0\0\0\0\0", 7.0), (b"A\0\0\0\0\0\0\0", b"_\0"),
                      (b"Z\0\0\0\0\0\0\0", 9.0), (b"_\0\0\0\0\0\0\0", b".\0"),
                      (3.0, 8.0)])],
        "character": [("MIXED", [("ID", CHAR, 5), ("AGE", NUM, 8)],
                       [("ab", 60.0), ("cdefg", 18.0), ("", 80.0)])],
        "multi_member": [
            ("FIRST", [("K", NUM, 8), ("L", CHAR, 3)], [(1.0, "x"), (2.0, "yy")]),
            ("SECOND", [("M", NUM, 8)], [(4.5,), (None,), (-7.0,)]),
        ],
        "empty_obs": [("EMPTY", [("P", NUM, 8), ("Q", NUM, 8)], [])],
        "narrow_records": [("NARROW", [("Z", NUM, 8)], [(0.25,), (16.0,), (-1.0,)])],
    }


def expected_value(kind, length, value):
    if kind == CHAR:
        return value
    raw = value if isinstance(value, bytes) else ibm_encode(value)
    return ibm_decode((raw[:length] + bytes(8))[:8])


def main():
    expected = {}
    for stem, members in corpus().items():
        (HERE / "xpt" / f"{stem}.xpt").write_bytes(write_xpt(members))
        expected[stem] = [
            {"name": name,
             "columns": {v[0]: [expected_value(v[1], v[2], row[i]) for row in rows]
                         for i, v in enumerate(variables)},
             "kinds": {v[0]: ("numeric" if v[1] == NUM else "character") for v in variables}}
            for name, variables, rows in members
        ]
    (HERE / "xpt" / "expected.json").write_text(json.dumps(expected, indent=1))


if __name__ == "__main__":
    main()
