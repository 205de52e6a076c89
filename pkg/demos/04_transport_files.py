"""Reading SAS transport (XPT v5) files.

Numbers are stored as IBM hexadecimal floats: a sign bit, a base-16
exponent biased by 64 and a 56-bit fraction.
"""
import struct
import sys
from pathlib import Path

from riskpath.xpt import ibm_to_ieee, parse_xpt_members

for raw in ("41 10 00 00 00 00 00 00", "C1 10 00 00 00 00 00 00",
            "42 64 00 00 00 00 00 00", "2E 00 00 00 00 00 00 00"):
    print(raw, "->", ibm_to_ieee(bytes.fromhex(raw)))

# 0x41 = exponent 1, fraction 0x10/0x100 = 1/16, so 1/16 * 16**1 = 1.
print("IEEE 1.0 for comparison:", struct.pack(">d", 1.0).hex(" "))

# Pass an .xpt path to list its members; defaults to a test fixture.
default = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "xpt" / "multi_member.xpt"
path = Path(sys.argv[1]) if len(sys.argv) > 1 else default
for member, table in parse_xpt_members(path.read_bytes()):
    print(f"{member.name}: {table.n_rows} rows, columns {table.names}")
