"""Binary and CSV serialisation of timestamp streams.

Binary layout (little-endian, fixed width, no footer)::

    bytes 0-7    b"SFWMTAG1"
    bytes 8-15   reserved, all zero
    then N records of 9 bytes: uint64 timestamp [ps], uint8 channel

Records are sorted by (timestamp, channel). The format stores neither the
acquisition duration nor the seed; readers take the duration as an argument
or fall back to the last timestamp + 1 ps.
"""

import csv

import numpy as np

from .errors import StreamFormatError
from .montecarlo import PS, TimestampStream

MAGIC = b"SFWMTAG1"
HEADER_SIZE = 16
RECORD = np.dtype([("t", "<u8"), ("c", "u1")])
assert RECORD.itemsize == 9


def stream_bytes(s):
    records = np.empty(len(s), dtype=RECORD)
    records["t"] = s.timestamps
    records["c"] = s.channels
    return MAGIC + bytes(8) + records.tobytes()


def write_stream(s, path):
    with open(path, "wb") as fh:
        fh.write(stream_bytes(s))


def parse_stream(data, duration=None, n_channels=2):
    if len(data) < HEADER_SIZE:
        raise StreamFormatError("file shorter than the 16-byte header", offset=len(data))
    if data[:8] != MAGIC:
        raise StreamFormatError("bad magic, expected SFWMTAG1", offset=0)
    reserved = data[8:HEADER_SIZE]
    if any(reserved):
        first = next(i for i, v in enumerate(reserved) if v)
        raise StreamFormatError("reserved header bytes must be zero", offset=8 + first)
    body = len(data) - HEADER_SIZE
    n, extra = divmod(body, RECORD.itemsize)
    if extra:
        raise StreamFormatError(
            f"truncated record ({extra} trailing bytes)", offset=HEADER_SIZE + n * RECORD.itemsize
        )
    records = np.frombuffer(data, dtype=RECORD, count=n, offset=HEADER_SIZE)
    t = records["t"].copy()
    c = records["c"].copy()
    bad = np.flatnonzero(c >= n_channels)
    if bad.size:
        raise StreamFormatError(
            f"invalid channel {int(c[bad[0]])}", offset=HEADER_SIZE + int(bad[0]) * RECORD.itemsize + 8
        )
    if n > 1:
        key_dec = (t[1:] < t[:-1]) | ((t[1:] == t[:-1]) & (c[1:] < c[:-1]))
        out = np.flatnonzero(key_dec)
        if out.size:
            raise StreamFormatError(
                "records not sorted", offset=HEADER_SIZE + int(out[0] + 1) * RECORD.itemsize
            )
    if duration is None:
        duration = (int(t[-1]) + 1) / PS if n else 1.0 / PS
    elif n and int(t[-1]) >= round(duration * PS):
        raise StreamFormatError(
            "timestamp beyond the stated duration", offset=HEADER_SIZE + (n - 1) * RECORD.itemsize
        )
    return TimestampStream(t, c, float(duration))


def read_stream(path, duration=None):
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_stream(data, duration)


def write_stream_csv(s, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp_ps", "channel"])
        writer.writerows(zip(s.timestamps.tolist(), s.channels.tolist()))
