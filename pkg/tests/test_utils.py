import io

import pytest

from rsaed.core.ec_core import Point
from rsaed.utils import (hex_str_to_bytes, hex_str_to_int, hex_to_ciphertext, hex_to_point, parse_int, parse_int_list,
                         point_to_hex, read_hex_lines)


def test_hex_str_to_bytes():
    assert hex_str_to_bytes('02 07 03 03') == bytes([2, 7, 3, 3])
    assert hex_str_to_bytes('0x0307') == bytes([3, 7])
    assert hex_str_to_bytes('  ') == b''
    with pytest.raises(ValueError):
        hex_str_to_bytes('0g')


def test_hex_str_to_int():
    assert hex_str_to_int('FF') == 255
    with pytest.raises(ValueError):
        hex_str_to_int('xyz')
    with pytest.raises(TypeError):
        hex_str_to_int(12)


def test_parse_int():
    assert parse_int('12') == 12
    assert parse_int('0x1f') == 31
    with pytest.raises(ValueError):
        parse_int('twelve')


def test_parse_int_list():
    assert parse_int_list('4,8,16') == [4, 8, 16]
    assert parse_int_list('4-16:4') == [4, 8, 12, 16]
    assert parse_int_list('3-5') == [3, 4, 5]


def test_point_hex(toy):
    assert point_to_hex(Point(7, 9), toy) == '0307'
    assert hex_to_point('0307', toy) == Point(7, 9)


def test_hex_to_ciphertext(toy):
    assert str(hex_to_ciphertext('02070303', toy)) == '((7,0),(3,1))'


def test_read_hex_lines():
    stream = io.StringIO('# header\n\n 0207 \n0303\n')
    assert read_hex_lines(stream) == ['0207', '0303']
