"""Minimal compound-file (OLE2, version 3) writer and an independent directory reader.

Streams are padded to the 4096-byte mini-stream cutoff so everything lives in
regular sectors; that keeps the writer small without leaving the format.
"""
from __future__ import annotations

import struct
import uuid

SECTOR = 512
ENDOFCHAIN = 0xFFFFFFFE
FREESECT = 0xFFFFFFFF
FATSECT = 0xFFFFFFFD
NOSTREAM = 0xFFFFFFFF
MAGIC = bytes.fromhex("D0CF11E0A1B11AE1")
MINI_CUTOFF = 4096


def _clsid_bytes(clsid: str | None) -> bytes:
    if not clsid:
        return b"\0" * 16
    return uuid.UUID(clsid).bytes_le


def _cfb_key(name: str):
    return (len(name), name.upper())


class _Node:
    def __init__(self, name, kind, data=b"", clsid=None):
        self.name, self.kind, self.data, self.clsid = name, kind, data, clsid
        self.children: dict[str, _Node] = {}
        self.sid = None


def build_cfb(entries: dict[str, bytes | None], clsids: dict[str, str] | None = None,
              root_clsid: str | None = None) -> bytes:
    """entries: "Storage/Sub/Stream" -> bytes for streams, None for (empty) storages."""
    clsids = clsids or {}
    root = _Node("Root Entry", 5, clsid=root_clsid)
    for path, data in entries.items():
        parts = path.split("/")
        node = root
        for i, part in enumerate(parts):
            last = i == len(parts) - 1
            if part not in node.children:
                is_stream = last and data is not None
                sub_path = "/".join(parts[: i + 1])
                node.children[part] = _Node(part, 2 if is_stream else 1, data or b"" if is_stream else b"",
                                            clsids.get(sub_path))
            node = node.children[part]

    order: list[_Node] = []

    def number(node):
        node.sid = len(order)
        order.append(node)
        for child in sorted(node.children.values(), key=lambda n: _cfb_key(n.name)):
            number(child)
    number(root)

    # stream data sectors
    sectors: list[bytes] = []
    fat: list[int] = []
    starts: dict[int, tuple[int, int]] = {}
    for node in order:
        if node.kind != 2:
            continue
        data = node.data
        if len(data) < MINI_CUTOFF:
            data = data + b"\0" * (MINI_CUTOFF - len(data))
        n = -(-len(data) // SECTOR)
        first = len(sectors)
        for k in range(n):
            sectors.append(data[k * SECTOR:(k + 1) * SECTOR].ljust(SECTOR, b"\0"))
            fat.append(first + k + 1 if k < n - 1 else ENDOFCHAIN)
        starts[node.sid] = (first, len(data))

    # directory: children of a storage form a right-leaning chain, sorted
    dir_bytes = bytearray()
    for node in order:
        kids = sorted(node.children.values(), key=lambda n: _cfb_key(n.name))
        node.child_sid = kids[0].sid if kids else NOSTREAM
        for a, b in zip(kids, kids[1:]):
            a.right = b.sid
    for node in order:
        name = node.name.encode("utf-16-le") + b"\0\0"
        start, size = starts.get(node.sid, (ENDOFCHAIN, 0))
        if node.kind == 1:
            start, size = 0, 0
        entry = name.ljust(64, b"\0")
        entry += struct.pack("<HBB", len(name), node.kind, 1)
        entry += struct.pack("<III", NOSTREAM, getattr(node, "right", NOSTREAM), node.child_sid)
        entry += _clsid_bytes(node.clsid)
        entry += struct.pack("<I", 0) + b"\0" * 16
        entry += struct.pack("<IQ", start, size)
        dir_bytes += entry
    while len(dir_bytes) % SECTOR:
        dir_bytes += (b"\0" * 64 + struct.pack("<HBB", 0, 0, 0) + struct.pack("<III", NOSTREAM, NOSTREAM, NOSTREAM)
                      + b"\0" * 36 + struct.pack("<IQ", 0, 0))
    first_dir = len(sectors)
    n_dir = len(dir_bytes) // SECTOR
    for k in range(n_dir):
        sectors.append(bytes(dir_bytes[k * SECTOR:(k + 1) * SECTOR]))
        fat.append(first_dir + k + 1 if k < n_dir - 1 else ENDOFCHAIN)

    n_fat = 1
    while (len(sectors) + n_fat) > n_fat * (SECTOR // 4):
        n_fat += 1
    assert n_fat <= 109, "DIFAT sectors not supported"
    first_fat = len(sectors)
    fat.extend([FATSECT] * n_fat)
    fat.extend([FREESECT] * (n_fat * (SECTOR // 4) - len(fat)))
    fat_bytes = struct.pack(f"<{len(fat)}I", *fat)
    for k in range(n_fat):
        sectors.append(fat_bytes[k * SECTOR:(k + 1) * SECTOR])

    header = MAGIC + b"\0" * 16
    header += struct.pack("<HHHHH", 0x3E, 3, 0xFFFE, 9, 6) + b"\0" * 6
    header += struct.pack("<IIIIIIIII", 0, n_fat, first_dir, 0, MINI_CUTOFF, ENDOFCHAIN, 0, ENDOFCHAIN, 0)
    difat = [first_fat + k for k in range(n_fat)] + [FREESECT] * (109 - n_fat)
    header += struct.pack("<109I", *difat)
    assert len(header) == SECTOR
    return header + b"".join(sectors)


def walk_directory(data: bytes) -> list[tuple[str, int]]:
    """(path, type) for every directory entry reachable from the root; 1=storage, 2=stream.

    Written against the format description only, as a cross-check for fixtures.
    """
    assert data[:8] == MAGIC
    shift, = struct.unpack_from("<H", data, 30)
    size = 1 << shift
    n_fat, first_dir = struct.unpack_from("<II", data, 44)
    difat = struct.unpack_from("<109I", data, 76)[:n_fat]

    def sector(i):
        return data[size + i * size: size + (i + 1) * size]
    fat = []
    for s in difat:
        fat.extend(struct.unpack(f"<{size // 4}I", sector(s)))
    chain, s = [], first_dir
    while s != ENDOFCHAIN:
        chain.append(s)
        s = fat[s]
    raw = b"".join(sector(s) for s in chain)
    entries = []
    for off in range(0, len(raw), 128):
        e = raw[off:off + 128]
        name_len, kind = struct.unpack_from("<HB", e, 64)
        left, right, child = struct.unpack_from("<III", e, 68)
        name = e[:max(0, name_len - 2)].decode("utf-16-le")
        entries.append((name, kind, left, right, child))

    out = []

    def visit_siblings(sid, prefix):
        if sid == NOSTREAM:
            return
        name, kind, left, right, child = entries[sid]
        visit_siblings(left, prefix)
        path = f"{prefix}{name}"
        out.append((path, kind))
        if kind == 1:
            visit_siblings(child, path + "/")
        visit_siblings(right, prefix)
    visit_siblings(entries[0][4], "")
    return out


def fib_stream(encrypted: bool = False, text: bytes = b"") -> bytes:
    """A WordDocument stream beginning with a bare FIB header."""
    flags = 0x0100 if encrypted else 0
    # wIdent, nFib, unused, lid, pnNext, then the flag word at offset 0x0A
    head = struct.pack("<HHHHHH", 0xA5EC, 0xC1, 0, 0x0409, 0, flags)
    return head + b"\0" * 20 + text
