"""
Reading and writing parameter stores in the PGF1 binary format.

    magic    4 bytes  b"PGF1"
    version  u16
    count    u32
    count entries of:
        name length u16, UTF-8 name
        rank u8, rank dims as u32
        values as little-endian float32, row-major

All integers are little-endian. Values are widened back to float64 when read.

Date: Oct 2026

"""

import io
import struct

import numpy as np

from pdmtools.exceptions import ArtifactIOError, PgfFormatError
from pdmtools.network import ParameterStore

MAGIC = b"PGF1"
VERSION = 1


def write_pgf(store, file):
    """
    :param store: ParameterStore
    :param file: output path
    """
    with io.open(file, mode="wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<HI", VERSION, len(store)))
        for name, array in store.items():
            encoded = name.encode("utf-8")
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<B", array.ndim))
            f.write(struct.pack("<%dI" % array.ndim, *array.shape))
            f.write(np.ascontiguousarray(array, dtype="<f4").tobytes())


def _read_exact(f, size, what):
    data = f.read(size)
    if len(data) != size:
        raise PgfFormatError("truncated PGF1 file while reading %s" % what)
    return data


def read_pgf(file, rng_seed=0):
    """
    :param file: path of a PGF1 file
    :param rng_seed: seed recorded on the returned store
    :return: ParameterStore
    """
    try:
        f = io.open(file, mode="rb")
    except FileNotFoundError:
        raise ArtifactIOError("weight file not found: %s" % file)

    with f:
        if _read_exact(f, 4, "magic") != MAGIC:
            raise PgfFormatError("%s is not a PGF1 file" % file)
        version, count = struct.unpack("<HI", _read_exact(f, 6, "header"))
        if version != VERSION:
            raise PgfFormatError("unsupported PGF1 version %d" % version)

        store = ParameterStore(rng_seed)
        for _ in range(count):
            (name_len,) = struct.unpack("<H", _read_exact(f, 2, "name length"))
            name = _read_exact(f, name_len, "name").decode("utf-8")
            (rank,) = struct.unpack("<B", _read_exact(f, 1, "rank"))
            dims = struct.unpack("<%dI" % rank, _read_exact(f, 4 * rank, "dims"))
            size = int(np.prod(dims))
            values = np.frombuffer(_read_exact(f, 4 * size, name), dtype="<f4")
            store.add(name, values.astype(np.float64).reshape(dims))

        if f.read(1):
            raise PgfFormatError("trailing bytes after %d entries in %s" % (count, file))
    return store
