import random

import pytest

from detcode import Field, build_encoder, build_message_matrix, encode

# Systematic Vandermonde on generators 1..8 over GF(13): tail rows below the
# identity block, frozen as the package's primary golden vector.
GOLDEN_TAIL_ROWS = [
    [12, 4, 7, 4],
    [9, 2, 6, 10],
    [3, 10, 7, 7],
    [6, 5, 7, 9],
]


@pytest.fixture(scope="session")
def gf13():
    return Field(13)


@pytest.fixture(scope="session")
def encoder8(gf13):
    return build_encoder(8, 4, gf13)


@pytest.fixture(scope="session")
def message8(gf13):
    rng = random.Random(0xC0DE)
    return build_message_matrix([rng.randrange(13) for _ in range(20)], 4, 2, gf13)


@pytest.fixture(scope="session")
def contents8(encoder8, message8):
    return encode(encoder8, message8)
