"""Bit-exact on-disk format for (dictionary, grammar, metadata).

Layout: a fixed 16-byte preamble (magic ``TDOC``, version, flags, reserved)
followed by the payload -- header block, dictionary block, grammar block.
With the deflate flag set, everything after the preamble is one raw DEFLATE
stream (RFC 1951). Varints are unsigned LEB128; fixed-width fields are
little-endian. See docs/format.md for a hex-annotated example.
"""

from __future__ import annotations

import zlib
from collections import deque
from dataclasses import dataclass

from .corpus import Dictionary, EncodedCorpus, FileEntry
from .sequitur import Grammar

MAGIC = b"TDOC"
VERSION = 1
PREAMBLE_SIZE = 16
FLAG_DEFLATE = 0x01


class ContainerError(ValueError):
    """Malformed container (CLI exit code 3)."""


class BadMagicError(ContainerError):
    pass


class UnsupportedVersionError(ContainerError):
    pass


class TruncatedContainerError(ContainerError):
    pass


class DeflateError(ContainerError):
    pass


class FeatureMismatchError(ContainerError):
    """Header feature block disagrees with recomputed payload values."""


@dataclass
class ContainerHeader:
    version: int
    deflate: bool
    n_terminals: int
    word_count: int
    file_table: list[FileEntry]
    total_tokens: int
    vocab_size: int
    rule_count: int
    container_size: int = 0

    @property
    def file_count(self) -> int:
        return len(self.file_table)


# -- varints -------------------------------------------------------------------


def write_varint(buf: bytearray, value: int) -> None:
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            buf.append(byte | 0x80)
        else:
            buf.append(byte)
            return


def read_varint(data, pos: int) -> tuple[int, int]:
    value = 0
    shift = 0
    size = len(data)
    while True:
        if pos >= size:
            raise TruncatedContainerError("varint runs past end of payload")
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7


def decode_varints(data, pos: int, count: int) -> tuple[list[int], int]:
    """Batch varint decode; the single-byte fast path dominates hot reads."""
    out = []
    append = out.append
    size = len(data)
    for _ in range(count):
        if pos >= size:
            raise TruncatedContainerError("varint runs past end of payload")
        byte = data[pos]
        pos += 1
        if byte < 0x80:
            append(byte)
            continue
        value = byte & 0x7F
        shift = 7
        while True:
            if pos >= size:
                raise TruncatedContainerError("varint runs past end of payload")
            byte = data[pos]
            pos += 1
            if byte < 0x80:
                append(value | (byte << shift))
                break
            value |= (byte & 0x7F) << shift
            shift += 7
    return out, pos


# -- writing -------------------------------------------------------------------


def build_payload(
    dictionary: Dictionary, grammar: Grammar, file_table: list[FileEntry]
) -> bytes:
    buf = bytearray()
    write_varint(buf, grammar.n_terminals)
    write_varint(buf, dictionary.word_count)
    write_varint(buf, len(file_table))
    for entry in file_table:
        name = entry.name.encode("utf-8")
        write_varint(buf, len(name))
        buf += name
        write_varint(buf, entry.token_count)
        write_varint(buf, entry.separator_code)
    # feature block
    write_varint(buf, sum(e.token_count for e in file_table))
    write_varint(buf, dictionary.word_count)
    write_varint(buf, len(grammar.rules))
    # dictionary block
    for word in dictionary.words:
        encoded = word.encode("utf-8")
        write_varint(buf, len(encoded))
        buf += encoded
    # grammar block
    for body in grammar.rules:
        write_varint(buf, len(body))
        for sym in body:
            write_varint(buf, sym)
    return bytes(buf)


def write_container(
    dictionary: Dictionary,
    grammar: Grammar,
    file_table: list[FileEntry],
    deflate: bool = True,
) -> bytes:
    if dictionary.n_total != grammar.n_terminals:
        raise ContainerError("dictionary and grammar disagree on terminal count")
    if dictionary.separator_count != len(file_table):
        raise ContainerError("file table does not match separator count")
    payload = build_payload(dictionary, grammar, file_table)
    flags = FLAG_DEFLATE if deflate else 0
    preamble = MAGIC + bytes([VERSION, flags]) + b"\x00" * (PREAMBLE_SIZE - 6)
    if deflate:
        compressor = zlib.compressobj(6, zlib.DEFLATED, -15)
        payload = compressor.compress(payload) + compressor.flush()
    return preamble + payload


def compress_corpus(
    dictionary: Dictionary, encoded: EncodedCorpus, grammar: Grammar, deflate=True
) -> bytes:
    return write_container(dictionary, grammar, encoded.file_table, deflate)


# -- reading -------------------------------------------------------------------


def _read_preamble(data: bytes) -> tuple[int, bool]:
    if len(data) < PREAMBLE_SIZE:
        raise TruncatedContainerError(
            f"container shorter than the {PREAMBLE_SIZE}-byte preamble"
        )
    if data[:4] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}")
    version = data[4]
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported container version {version}")
    return version, bool(data[5] & FLAG_DEFLATE)


def _inflate(data: bytes) -> bytes:
    try:
        decompressor = zlib.decompressobj(-15)
        payload = decompressor.decompress(data)
        payload += decompressor.flush()
        if not decompressor.eof:
            raise TruncatedContainerError("deflate stream ends prematurely")
        if decompressor.unused_data:
            raise ContainerError(
                f"{len(decompressor.unused_data)} trailing bytes after "
                "the deflate stream"
            )
        return payload
    except zlib.error as exc:
        raise DeflateError(f"deflate layer is corrupt: {exc}") from exc


def _parse_header(payload, version: int, deflate: bool) -> tuple[ContainerHeader, int]:
    pos = 0
    n_terminals, pos = read_varint(payload, pos)
    word_count, pos = read_varint(payload, pos)
    file_count, pos = read_varint(payload, pos)
    file_table = []
    for _ in range(file_count):
        name_len, pos = read_varint(payload, pos)
        if pos + name_len > len(payload):
            raise TruncatedContainerError("file name runs past end of payload")
        name = bytes(payload[pos : pos + name_len]).decode("utf-8")
        pos += name_len
        token_count, pos = read_varint(payload, pos)
        separator, pos = read_varint(payload, pos)
        file_table.append(FileEntry(name, token_count, separator))
    total_tokens, pos = read_varint(payload, pos)
    vocab_size, pos = read_varint(payload, pos)
    rule_count, pos = read_varint(payload, pos)
    header = ContainerHeader(
        version=version,
        deflate=deflate,
        n_terminals=n_terminals,
        word_count=word_count,
        file_table=file_table,
        total_tokens=total_tokens,
        vocab_size=vocab_size,
        rule_count=rule_count,
    )
    return header, pos


def read_header(data: bytes) -> ContainerHeader:
    """Parse preamble and header block only (grammar left untouched).

    On deflated containers the stream is inflated incrementally, just far
    enough to cover the header.
    """
    version, deflate = _read_preamble(data)
    body = data[PREAMBLE_SIZE:]
    if not deflate:
        header, _ = _parse_header(body, version, deflate)
        header.container_size = len(data)
        return header
    decompressor = zlib.decompressobj(-15)
    inflated = bytearray()
    feed = body
    while feed:
        try:
            inflated += decompressor.decompress(feed, 64 * 1024)
        except zlib.error as exc:
            raise DeflateError(f"deflate layer is corrupt: {exc}") from exc
        try:
            header, _ = _parse_header(inflated, version, deflate)
            header.container_size = len(data)
            return header
        except TruncatedContainerError:
            feed = decompressor.unconsumed_tail
    # all input consumed; either the header really is truncated or the
    # final parse succeeds on the complete payload
    header, _ = _parse_header(inflated, version, deflate)
    header.container_size = len(data)
    return header


def read_container(data: bytes) -> tuple[Dictionary, Grammar, ContainerHeader]:
    """Exact inverse of write_container; verifies the feature block."""
    version, deflate = _read_preamble(data)
    payload = data[PREAMBLE_SIZE:]
    if deflate:
        payload = _inflate(payload)
    header, pos = _parse_header(payload, version, deflate)
    header.container_size = len(data)

    words = []
    for _ in range(header.word_count):
        word_len, pos = read_varint(payload, pos)
        if pos + word_len > len(payload):
            raise TruncatedContainerError("dictionary word runs past end of payload")
        words.append(bytes(payload[pos : pos + word_len]).decode("utf-8"))
        pos += word_len
    separator_count = header.n_terminals - header.word_count
    dictionary = Dictionary(words, separator_count)

    bodies = []
    for _ in range(header.rule_count):
        body_len, pos = read_varint(payload, pos)
        body, pos = decode_varints(payload, pos, body_len)
        bodies.append(body)
    if pos != len(payload):
        raise ContainerError(f"{len(payload) - pos} trailing bytes after grammar")
    grammar = Grammar(header.n_terminals, header.word_count, bodies)

    _verify_features(header, dictionary, grammar)
    return dictionary, grammar, header


def _verify_features(header, dictionary: Dictionary, grammar: Grammar) -> None:
    if header.vocab_size != dictionary.word_count:
        raise FeatureMismatchError(
            f"vocabulary size {header.vocab_size} != dictionary {dictionary.word_count}"
        )
    if header.file_count != dictionary.separator_count:
        raise FeatureMismatchError(
            f"file count {header.file_count} != separator count "
            f"{dictionary.separator_count}"
        )
    recomputed = _grammar_token_count(grammar)
    if recomputed != header.total_tokens:
        raise FeatureMismatchError(
            f"token count {header.total_tokens} != recomputed {recomputed}"
        )


def _grammar_token_count(grammar: Grammar) -> int:
    """Word tokens in the expansion, via rule frequencies (no expansion)."""
    n = grammar.n_terminals
    n_words = grammar.n_words
    rule_count = len(grammar.rules)
    in_deg = [0] * rule_count
    direct = [0] * rule_count
    children: list[list[int]] = []
    for index, body in enumerate(grammar.rules):
        kids = []
        words = 0
        for sym in body:
            if sym >= n:
                kid = sym - n
                kids.append(kid)
                in_deg[kid] += 1
            elif sym < n_words:
                words += 1
        direct[index] = words
        children.append(kids)

    freq = [0] * rule_count
    freq[0] = 1
    queue = deque([0])
    seen = 0
    while queue:
        index = queue.popleft()
        seen += 1
        f = freq[index]
        for kid in children[index]:
            freq[kid] += f
            in_deg[kid] -= 1
            if in_deg[kid] == 0:
                queue.append(kid)
    if seen != rule_count:
        raise ContainerError("grammar graph is cyclic or has unreachable rules")
    return sum(f * d for f, d in zip(freq, direct))


# -- reporting -----------------------------------------------------------------


@dataclass
class CompressionReport:
    """Size ratios, defined as size(original) / size(compressed)."""

    raw_size: int
    container_size: int
    deflate_of_raw_size: int

    @property
    def container_ratio(self) -> float:
        return self.raw_size / self.container_size

    @property
    def deflate_ratio(self) -> float:
        return self.raw_size / self.deflate_of_raw_size


def compression_report(
    raw_size: int, container_size: int, deflate_of_raw_size: int
) -> CompressionReport:
    return CompressionReport(raw_size, container_size, deflate_of_raw_size)
