import pytest

from nile.datagen import GenSpec, generate
from nile.translate import TrainConfig, train

GOLDEN_UTTERANCE = "Please add a firewall and an IDS from Iperf client to server"

GOLDEN_NILE = (
    "define intent testIntent:\n"
    "  from endpoint('iperf client')\n"
    "  to endpoint('iperf server')\n"
    "  add middlebox('firewall'),\n"
    "      middlebox('ids')"
)

GOLDEN_COMMANDS = (
    'vim-emu compute start -d vnfs_dc -n fw -i genic-vnf '
    '-c "./start_firewall.sh &" '
    '--net"(id=in,ip=10.0.0.20/24),(id=out,ip=10.0.0.21/24)"\n'
    'vim-emu compute start -d vnfs_dc -n ids -i genic-vnf '
    '-c "./start_snort.sh &" '
    '--net"(id=in,ip=10.0.0.30/24),(id=out,ip=10.0.0.31/24)"\n'
    'vim-emu network add -b -src iperf-c:c-eth0 -dst fw:in\n'
    'vim-emu network add -b -src fw:out -dst ids:in\n'
    'vim-emu network add -b -src ids:out -dst iperf-s:s-eth0\n'
)


@pytest.fixture(scope="session")
def tiny_model():
    """Fast, inaccurate model for wiring tests."""
    data = generate(GenSpec(size=40, seed=5))
    model, _ = train(data, TrainConfig(epochs=6, batch_size=16, seed=5))
    return model, data


@pytest.fixture(scope="session")
def model_1000():
    """Model good enough to translate the common intent shapes exactly."""
    data = generate(GenSpec(size=1000, seed=42))
    model, report = train(
        data, TrainConfig(epochs=70, batch_size=64, learning_rate=5.0, seed=11)
    )
    return model, data, report
