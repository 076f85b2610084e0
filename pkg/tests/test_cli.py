import io
import json
import os

import pytest

from rsaed.cli import EXIT_CONFIG, EXIT_OK, EXIT_PROTOCOL, EXIT_USAGE, main
from rsaed.user_data import Scenario, Topology


def _run(argv, stdin_text=''):
    stdout = io.StringIO()
    code = main(argv, stdin=io.StringIO(stdin_text), stdout=stdout)
    return code, stdout.getvalue()


def test_keygen_forced_scalar():
    code, out = _run(['keygen', '--curve', 'toy11', '--x', '6'])
    assert code == EXIT_OK
    assert out.splitlines() == ['x=6', 'Y=0307']


def test_vectors_toy11():
    code, out = _run(['vectors', 'toy11'])
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].startswith('curve=toy11 ')
    assert lines[1].startswith('fingerprint=')
    assert lines[2] == 'G=(2,7)'
    assert '6G=(7,9)' in lines
    assert '13G=inf' in lines
    assert 'x=6 Y=(7,9)' in lines
    assert 'C1=((7,2),(3,5)) m=5 k=7 compressed=((7,0),(3,1))' in lines
    assert 'C2=((10,2),(2,7)) m=3 k=4 compressed=((10,0),(2,1))' in lines
    assert 'C=((5,9),(10,9))' in lines
    assert lines[-2:] == ['M=(3,5)', 'm=8']


def test_vectors_secp160r1_is_seeded():
    code, first = _run(['vectors', 'secp160r1', '--seed', '3'])
    _, second = _run(['vectors', 'secp160r1', '--seed', '3'])
    assert code == EXIT_OK
    assert first == second
    assert first.splitlines()[-1] == 'm=8'


def test_fingerprint_differs_per_curve():
    _, toy = _run(['vectors', 'toy11'])
    _, secp = _run(['vectors', 'secp160r1'])
    assert toy.splitlines()[1] != secp.splitlines()[1]


def test_encrypt_aggregate_decrypt_pipeline():
    code, c1 = _run(['encrypt', '--curve', 'toy11', '--x', '6', '--m', '5', '--k', '7'])
    assert code == EXIT_OK
    assert c1 == '02070303\n'
    _, both = _run(['encrypt', '--curve', 'toy11', '--public-key', '0307', '--m', '3', '--k', '4', '--append'], c1)
    assert both.splitlines() == ['02070303', '020a0302']
    _, total = _run(['aggregate', '--curve', 'toy11'], both)
    code, out = _run(['decrypt', '--curve', 'toy11', '--x', '6'], total)
    assert code == EXIT_OK
    assert out == '8\n'


def test_aggregate_from_files(tmp_path):
    path = tmp_path / 'c.txt'
    path.write_text('# 两个密文\n02070303\n\n020a0302\n', encoding='utf-8')
    code, out = _run(['aggregate', '--curve', 'toy11', '--input', str(path)])
    assert code == EXIT_OK
    _, m = _run(['decrypt', '--curve', 'toy11', '--x', '6', '--ciphertext', out.strip(), '--method', 'kangaroo'])
    assert m == '8\n'


def test_decrypt_out_of_bound():
    code, out = _run(['decrypt', '--curve', 'toy11', '--x', '6', '--bound', '4', '--ciphertext', '0305030a'])
    assert code == EXIT_PROTOCOL
    assert out == ''


def test_encrypt_rejects_reading_above_bound():
    code, _ = _run(['encrypt', '--curve', 'toy11', '--x', '6', '--m', '6', '--k', '3', '--max-single', '5'])
    assert code == EXIT_USAGE


def test_usage_errors():
    assert _run(['aggregate', '--curve', 'toy11'])[0] == EXIT_USAGE
    assert _run(['decrypt', '--curve', 'toy11', '--x', '6', '--ciphertext', 'zz'])[0] == EXIT_USAGE
    assert _run(['encrypt', '--m', '1'])[0] == EXIT_USAGE
    assert _run(['frobnicate'])[0] == EXIT_USAGE
    assert _run(['simulate', '--nodes', '4'])[0] == EXIT_USAGE


def test_simulate_summary_delay():
    code, out = _run(['simulate', '--seed', '1', '--nodes', '20', '--mode', 'rsaed'])
    assert code == EXIT_OK
    summary = json.loads(out)
    assert summary['outcomes'][0]['delay_s'] == pytest.approx(9.5)
    code, out = _run(['simulate', '--seed', '1', '--nodes', '20', '--mode', 'seceg'])
    assert json.loads(out)['outcomes'][0]['delay_s'] == pytest.approx(19.0)


def test_simulate_csv_format():
    code, out = _run(['simulate', '--seed', '1', '--nodes', '4', '--rounds', '2', '--format', 'csv'])
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == 'round,node,role,energy_mj,remaining_mj,packets_received'
    assert len(lines) == 9


def test_simulate_config_file(tmp_path):
    path = tmp_path / 'scenario.json'
    scenario = Scenario(topology=Topology(chains=[[4, 4]]), seed=5)
    path.write_text(scenario.to_json(), encoding='utf-8')
    code, out = _run(['simulate', '--seed', '5', '--config', str(path)])
    assert code == EXIT_OK
    assert json.loads(out)['outcomes'][0]['delay_s'] == pytest.approx(3.5)


def test_simulate_config_errors(tmp_path):
    assert _run(['simulate', '--seed', '1', '--config', str(tmp_path / 'missing.json')])[0] == EXIT_CONFIG
    bad = tmp_path / 'bad.json'
    bad.write_text('{"topology": {"chains": [[2]]}}', encoding='utf-8')
    assert _run(['simulate', '--seed', '1', '--config', str(bad)])[0] == EXIT_CONFIG


def test_simulate_out_dir(tmp_path):
    out_dir = tmp_path / 'results'
    code, out = _run(['simulate', '--seed', '2', '--nodes', '5', '--out', str(out_dir)])
    assert code == EXIT_OK
    paths = out.splitlines()
    assert len(paths) == 2
    assert all(os.path.isfile(path) for path in paths)
    assert paths[0].endswith('rsaed_seed2_nodes.csv')


def test_sweep_csv(tmp_path):
    code, out = _run(['sweep', '--seed', '1', '--nodes', '4,8', '--modes', 'seceg,rsaed'])
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == 'N,mode,agg_energy_mj,delay_s,packets_received'
    assert [line.split(',')[:2] for line in lines[1:]] == [['4', 'seceg'], ['4', 'rsaed'], ['8', 'seceg'],
                                                          ['8', 'rsaed']]
    target = tmp_path / 'sweep' / 'rows.csv'
    code, printed = _run(['sweep', '--seed', '1', '--nodes', '4-8:4', '--out', str(target)])
    assert code == EXIT_OK
    assert printed.strip() == str(target)
    assert target.read_text(encoding='utf-8') == out


def test_calibration_aliases():
    def delay(calibration):
        code, out = _run(['simulate', '--seed', '1', '--nodes', '4', '--mode', 'seceg', '--calibration', calibration])
        assert code == EXIT_OK
        return json.loads(out)['outcomes'][0]['delay_s']

    assert delay('figure5') == pytest.approx(3.0)
    assert delay('figure5') == delay('per-message')
    assert delay('table2') == delay('primitive')
    assert delay('table2') != pytest.approx(3.0)


def test_sweep_single_mode():
    code, out = _run(['sweep', '--seed', '1', '--nodes', '4,8', '--mode', 'rsaed'])
    assert code == EXIT_OK
    assert [line.split(',')[:2] for line in out.splitlines()[1:]] == [['4', 'rsaed'], ['8', 'rsaed']]
