import pytest

from twoway_cvqkd.protocol import (
    AmplifierSpec,
    ChannelModel,
    DetectorModel,
    ProtocolParams,
)


@pytest.fixture
def homodyne_params() -> ProtocolParams:
    return ProtocolParams(channel=ChannelModel(distance_km=20.0))


@pytest.fixture
def heterodyne_params() -> ProtocolParams:
    return ProtocolParams(
        channel=ChannelModel(distance_km=20.0),
        detector=DetectorModel(kind="heterodyne"),
    )


@pytest.fixture
def pia_params() -> ProtocolParams:
    return ProtocolParams(
        channel=ChannelModel(distance_km=60.0),
        detector=DetectorModel(kind="heterodyne"),
        amplifier=AmplifierSpec(kind="pia", gain=15.0),
    )
