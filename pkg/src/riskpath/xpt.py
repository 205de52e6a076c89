"""Readers for SAS transport (XPORT version 5) files and plain CSV.

Both readers produce a :class:`RawTable`: untyped survey columns with
numeric values held as float64 (``nan`` marks a missing value) and
character values as stripped strings.

The transport layout is a stream of 80-byte records::

    LIBRARY header, 2 library records
    MEMBER header, DSCRPTR header, 2 member records
    NAMESTR header, n * 140-byte descriptors (blank padded to 80)
    OBS header, observations (blank padded to 80)
    [next MEMBER header ...]

Numerics are IBM System/360 hexadecimal floats, big endian.
"""
import csv
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MalformedHeader,
    MissingColumn,
    NonNumericCell,
    TruncatedObservation,
    UnsupportedVersion,
)

RECORD = 80
NAMESTR_LEN = 140

_PREFIX = b"HEADER RECORD*******"
_LIBRARY = _PREFIX + b"LIBRARY HEADER RECORD!!!!!!!"
_LIBV8 = _PREFIX + b"LIBV8   HEADER RECORD!!!!!!!"
_MEMBER = _PREFIX + b"MEMBER  HEADER RECORD!!!!!!!"
_MEMBV8 = _PREFIX + b"MEMBV8  HEADER RECORD!!!!!!!"
_DSCRPTR = _PREFIX + b"DSCRPTR HEADER RECORD!!!!!!!"
_NAMESTR = _PREFIX + b"NAMESTR HEADER RECORD!!!!!!!"
_OBS = _PREFIX + b"OBS     HEADER RECORD!!!!!!!"

# ntype, nhfun, nlng, nvar0, nname, nlabel, nform, nfl, nfd, nfj, nfill,
# niform, nifl, nifd, npos, rest
_NAMESTR_FMT = ">hhhh8s40s8shhh2s8shhl52s"

_MISSING_TAGS = frozenset(b"._ABCDEFGHIJKLMNOPQRSTUVWXYZ")


@dataclass
class Column:
    name: str
    kind: str  # "numeric" | "character"
    values: object  # float64 ndarray (nan = missing) or list of str


@dataclass
class RawTable:
    columns: list = field(default_factory=list)
    n_rows: int = 0

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        for c in self.columns:
            if len(c.values) != self.n_rows:
                raise ValueError(f"column {c.name} has {len(c.values)} rows, expected {self.n_rows}")

    @property
    def names(self):
        return [c.name for c in self.columns]

    def __contains__(self, name):
        return name in self.names

    def __getitem__(self, name):
        for c in self.columns:
            if c.name == name:
                return c.values
        raise KeyError(name)


@dataclass
class Variable:
    name: str
    kind: str
    length: int
    position: int
    label: str = ""


@dataclass
class XptMember:
    name: str
    variables: list
    record_length: int

    def __post_init__(self):
        if sum(v.length for v in self.variables) != self.record_length:
            raise MalformedHeader(f"member {self.name}: variable lengths do not sum to record length")
        for v in self.variables:
            if v.kind == "numeric" and not 2 <= v.length <= 8:
                raise MalformedHeader(f"numeric variable {v.name} has length {v.length}")


def _is_missing(raw):
    return raw[0] in _MISSING_TAGS and not any(raw[1:])


def ibm_to_ieee(raw):
    """Decode one 8-byte IBM hexadecimal float.

    Returns ``nan`` for the SAS missing sentinels ('.', '.A'-'.Z', '._').

    >>> ibm_to_ieee(b"\\x41\\x10\\x00\\x00\\x00\\x00\\x00\\x00")
    1.0
    """
    raw = bytes(raw)
    if len(raw) != 8:
        raise ValueError("expected exactly 8 bytes")
    if _is_missing(raw):
        return float("nan")
    return float(_decode_block(np.frombuffer(raw, dtype=np.uint8).reshape(1, 8))[0])


def _decode_block(block):
    """Vectorised decoder over an (n, 8) uint8 array."""
    words = block.copy().view(">u8").ravel().astype(np.uint64)
    sign = (words >> np.uint64(63)).astype(bool)
    exponent = ((words >> np.uint64(56)) & np.uint64(0x7F)).astype(np.int64)
    fraction = words & np.uint64(0x00FFFFFFFFFFFFFF)
    # value = fraction * 2**-56 * 16**(exponent - 64); the uint64 -> float64
    # cast is the only rounding step, ldexp is exact in this range.
    values = np.ldexp(fraction.astype(np.float64), 4 * (exponent - 64) - 56)
    values[sign] = -values[sign]

    first = block[:, 0]
    tagged = np.isin(first, np.frombuffer(bytes(sorted(_MISSING_TAGS)), dtype=np.uint8))
    tail_zero = ~block[:, 1:].any(axis=1)
    values[tagged & tail_zero] = np.nan
    return values


def _decode_numeric(field_bytes, length):
    """Decode a column of stored numerics (length 2..8, zero padded on the right)."""
    n = field_bytes.shape[0]
    block = np.zeros((n, 8), dtype=np.uint8)
    block[:, :length] = field_bytes
    return _decode_block(block)


def _text(raw):
    return raw.decode("ascii", errors="replace").strip()


def _records(data):
    return [data[i:i + RECORD] for i in range(0, len(data), RECORD)]


def _parse_namestrs(data, start, count):
    variables = []
    for i in range(count):
        chunk = data[start + i * NAMESTR_LEN:start + (i + 1) * NAMESTR_LEN]
        if len(chunk) < NAMESTR_LEN:
            raise MalformedHeader("namestr section is truncated")
        fields = struct.unpack(_NAMESTR_FMT, chunk)
        ntype, _, nlng, _, nname, nlabel = fields[:6]
        npos = fields[14]
        if ntype not in (1, 2):
            raise MalformedHeader(f"namestr {i}: unknown variable type {ntype}")
        variables.append(Variable(
            name=_text(nname).upper(),
            kind="numeric" if ntype == 1 else "character",
            length=nlng,
            position=npos,
            label=_text(nlabel),
        ))
    return variables


def _member_sections(data):
    """Yield (member header offset, end offset) for each member."""
    starts = []
    for offset in range(0, len(data), RECORD):
        head = data[offset:offset + len(_MEMBER)]
        if head == _MEMBER:
            starts.append(offset)
        elif head == _MEMBV8:
            raise UnsupportedVersion("version 8/9 member header (extended names) is not supported")
    return list(zip(starts, starts[1:] + [len(data)]))


def _parse_member(data, begin, end):
    head = data[begin:begin + RECORD]
    try:
        namestr_len = int(head[74:78])
    except ValueError:
        raise MalformedHeader("member header lacks the namestr length") from None
    if namestr_len != NAMESTR_LEN:
        # 136 is the VAX/VMS variant
        raise MalformedHeader(f"unsupported namestr length {namestr_len}")
    if data[begin + RECORD:begin + RECORD + len(_DSCRPTR)] != _DSCRPTR:
        raise MalformedHeader("missing DSCRPTR header record")
    descriptor = data[begin + 2 * RECORD:begin + 3 * RECORD]
    name = _text(descriptor[8:16])

    at = begin + 4 * RECORD
    if data[at:at + len(_NAMESTR)] != _NAMESTR:
        raise MalformedHeader(f"member {name}: missing NAMESTR header record")
    try:
        count = int(data[at + 54:at + 58])
    except ValueError:
        raise MalformedHeader(f"member {name}: bad variable count") from None
    at += RECORD
    variables = _parse_namestrs(data, at, count)
    at += -(-count * NAMESTR_LEN // RECORD) * RECORD
    if data[at:at + len(_OBS)] != _OBS:
        raise MalformedHeader(f"member {name}: missing OBS header record")
    at += RECORD

    record_length = sum(v.length for v in variables)
    member = XptMember(name=name, variables=variables, record_length=record_length)
    return member, _parse_observations(member, data[at:end])


def _parse_observations(member, body):
    reclen = member.record_length
    if reclen == 0:
        n = 0
    else:
        n = len(body) // reclen
        rest = body[n * reclen:]
        if rest.strip(b" "):
            raise TruncatedObservation(f"member {member.name}: stream ends inside an observation")
        # Blank records at the end are padding only while they fit in the
        # final (< 80 byte) pad region.
        pad = len(rest)
        while n > 0 and pad + reclen < RECORD and not body[(n - 1) * reclen:n * reclen].strip(b" "):
            n -= 1
            pad += reclen

    rows = np.frombuffer(body[:n * reclen], dtype=np.uint8).reshape(n, reclen) if n else \
        np.zeros((0, reclen), dtype=np.uint8)
    columns = []
    offset = 0
    for v in member.variables:
        start = v.position if v.position is not None else offset
        chunk = rows[:, start:start + v.length]
        if v.kind == "numeric":
            values = _decode_numeric(chunk, v.length)
        else:
            values = [_text(bytes(r)) for r in chunk]
        columns.append(Column(v.name, v.kind, values))
        offset += v.length
    return RawTable(columns=columns, n_rows=n)


def parse_xpt_members(data):
    """Parse every member of a transport file.

    Returns a list of ``(XptMember, RawTable)`` pairs in file order.
    """
    data = bytes(data)
    if len(data) < RECORD:
        raise MalformedHeader("stream is shorter than one header record")
    first = data[:len(_LIBRARY)]
    if first == _LIBV8:
        raise UnsupportedVersion("version 8/9 transport files are not supported")
    if first != _LIBRARY:
        raise MalformedHeader("first record is not a library header")
    if len(data) % RECORD:
        raise TruncatedObservation("stream length is not a multiple of 80 bytes")
    return [_parse_member(data, b, e) for b, e in _member_sections(data)]


def parse_xpt(data, member=None):
    """Parse a transport byte stream into a :class:`RawTable`.

    Parameters
    ----------
    data : bytes
        The full file contents.
    member : str, optional
        Member (dataset) name to return. Defaults to the first member.
    """
    members = parse_xpt_members(data)
    if not members:
        raise MalformedHeader("no member header found")
    if member is None:
        return members[0][1]
    for m, table in members:
        if m.name.upper() == member.upper():
            return table
    raise MissingColumn(f"no member named {member}")


def read_xpt(path, member=None):
    with open(path, "rb") as f:
        return parse_xpt(f.read(), member=member)


def load_csv(path, schema):
    """Load a comma separated file, parsing the ``schema`` columns as numbers.

    Empty cells become ``nan``. Columns outside the schema are carried as
    character columns. Column order follows the file header.
    """
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MissingColumn(f"{path}: no header row") from None
        rows = [r for r in reader if r]

    missing = [s for s in schema if s not in header]
    if missing:
        raise MissingColumn(f"{path}: missing column(s) {', '.join(missing)}")

    wanted = set(schema)
    columns = []
    for j, name in enumerate(header):
        cells = [r[j].strip() if j < len(r) else "" for r in rows]
        if name in wanted:
            values = np.empty(len(cells))
            for i, cell in enumerate(cells):
                if cell == "":
                    values[i] = np.nan
                    continue
                try:
                    values[i] = float(cell)
                except ValueError:
                    raise NonNumericCell(f"{path}: row {i + 2}, column {name}: {cell!r}") from None
            columns.append(Column(name, "numeric", values))
        else:
            columns.append(Column(name, "character", cells))
    return RawTable(columns=columns, n_rows=len(rows))
