from abc import ABC, abstractmethod
from pathlib import Path
from typing import BinaryIO, List, Union

from synth_control.ingest.observation import LongObservation

Source = Union[str, Path, bytes, BinaryIO]


class ObservationReader(ABC):
    @abstractmethod
    def read(self, source: Source) -> List[LongObservation]:
        pass
