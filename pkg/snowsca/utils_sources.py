"""Helper functions for snowsca related to storage source."""
from enum import Enum, unique
from typing import List, Optional, Tuple, Union

from .errors import InvalidSourceError
from .utils import read_file, save_file
from .utils_s3 import S3


def is_valid_source(source: Enum) -> bool:
    """Verifies if a source is valid and supported."""
    return isinstance(source, Enum) and source in SupportedSources


@unique
class SupportedSources(Enum):
    """Supported storage."""

    LOCAL = 0
    AWS = 1

    @classmethod
    def names(cls) -> List[str]:
        """Returns known source names."""
        return [e.name for e in cls]

    @classmethod
    def is_cloud(cls, source: Enum) -> bool:
        """Returns True for cloud source."""
        return source == cls.AWS

    @classmethod
    def from_location(cls, location: str) -> 'SupportedSources':
        """Returns the source a path or URL belongs to."""
        scheme, sep, _ = str(location).partition('://')
        if not sep:
            return cls.LOCAL
        if scheme.lower() == S3.NAME:
            return cls.AWS
        raise InvalidSourceError(scheme)

    def __str__(self) -> str:
        return self.name


class Storage:
    """Reads and writes whole objects on a storage source."""

    def __init__(self, source: SupportedSources = SupportedSources.LOCAL, \
            s3: Optional[S3] = None):
        if not is_valid_source(source):
            raise InvalidSourceError(source)
        self._source = source
        self._s3 = s3

    @classmethod
    def for_location(cls, location: str, s3: Optional[S3] = None) -> 'Storage':
        """Returns a storage matching the location scheme."""
        return cls(SupportedSources.from_location(location), s3)

    @property
    def source(self) -> SupportedSources:
        """Property getter for 'source'."""
        return self._source

    @property
    def s3(self) -> S3:
        """Returns the S3 client wrapper (creates if not available)."""
        if self._s3 is None:
            self._s3 = S3()
        return self._s3

    def _bucket_key(self, location: str) -> Tuple[str, str]:
        bucket, key = self.s3.parse_s3url(location)
        if not bucket or not key:
            raise InvalidSourceError(location, f'{location} is not an s3://bucket/key URL')
        return bucket, key

    def read(self, location: str) -> Tuple[Optional[bytes], Optional[str]]:
        """Returns (data, error)."""
        if SupportedSources.is_cloud(self._source):
            bucket, key = self._bucket_key(location)
            data = self.s3.get_object(bucket, key)
            return (data, self.s3.error)
        return read_file(location)

    def write(self, data: bytes, location: str) -> Union[None, str]:
        """Returns an error description or None."""
        if SupportedSources.is_cloud(self._source):
            bucket, key = self._bucket_key(location)
            return self.s3.put_object(data, bucket, key)
        return save_file(data, location)
