"""Helper functions for snowsca to access S3 cloud storage."""
import posixpath
import warnings
from typing import Optional, Tuple, Union
from urllib.parse import urlparse

from boto3 import client
from botocore.exceptions import ClientError, EndpointConnectionError

from .errors import StorageWarning


class S3:
    """ S3 access object.
    """

    NAME = 's3'
    SEP_STR = '/'

    @classmethod
    def parse_s3url(cls, s3_url: str) -> Tuple[Optional[str], Optional[str]]:
        """ Parses s3 url regardless if prefixed with scheme.
            Returns (None, None) if not s3 scheme.
        """
        if not s3_url:
            return (None, None)

        s3_parsed = urlparse(s3_url)
        if s3_parsed.scheme and s3_parsed.scheme != cls.NAME:
            return (None, None)
        if s3_parsed.netloc:
            return (s3_parsed.netloc, s3_parsed.path.lstrip(cls.SEP_STR))
        if cls.SEP_STR not in s3_parsed.path:
            return (s3_parsed.path, '')
        bucket, key = posixpath.normpath(s3_parsed.path).lstrip(cls.SEP_STR).split(cls.SEP_STR, 1)
        return (bucket, key)

    def __init__(self, key_name: Optional[str] = None, key_secret: Optional[str] = None, \
            region_name: Optional[str] = None):
        self._client = None
        self._error = None
        self._key_name = key_name
        self._key_secret = key_secret
        self._region_name = region_name

    @property
    def error(self) -> Optional[str]:
        """Last request error or None."""
        return self._error

    @property
    def key_name(self):
        """Property key_name getter."""
        return self._key_name

    @property
    def key_secret(self):
        """Property getter."""
        return self._key_secret

    def has_cred(self) -> bool:
        """Returns true when authentication is defined."""
        return bool(self.key_name) and bool(self.key_secret)

    @property
    def client(self):
        """Returns S3 client (creates if not available)."""
        if not self._client:
            kwargs = {'region_name': self._region_name} if self._region_name else {}
            if self.has_cred():
                kwargs.update(aws_access_key_id=self.key_name, \
                        aws_secret_access_key=self.key_secret)
            self._client = client(self.NAME, **kwargs)
        return self._client

    def get_object(self, bucket: str, obj_path: str) -> Union[None, bytes]:
        """ Retrieves selected object with provided S3 path.
        """
        self._error = None
        try:
            res = S3Res(self.client.get_object(Bucket=bucket, Key=obj_path))
        except (ClientError, EndpointConnectionError) as ex:
            self._error = f"Failed AWS get_object: {ex}"
            return None
        else:
            data = res.get_object_data()
            if data is None:
                self._error = f"Failed to parse response to get_object for: /{bucket[:20]}/{obj_path[:20]}..." # pylint: disable=line-too-long
            return data

    def put_object(self, data: bytes, bucket: str, obj_path: str) -> Union[None, str]:
        """ Stores provided bytes in the cloud.
            Returns error description or None
        """
        self._error = None
        try:
            res = S3Res(self.client.put_object(Bucket=bucket, Key=obj_path, Body=data))
        except (ClientError, EndpointConnectionError) as ex:
            self._error = f"Failed AWS put_object: {ex}"
        else:
            if not res.is_ok():
                self._error = f"Unexpected response to put_object for: /{bucket[:20]}/{obj_path[:20]}..." # pylint: disable=line-too-long
        return self._error


class S3Res:
    """ Represents S3 client response.
    """

    def __init__(self, res):
        self._res = res

    def is_ok(self) -> bool:
        """ Returns True for a 2xx response.
        """
        try:
            status = self._res['ResponseMetadata']['HTTPStatusCode']
        except (KeyError, TypeError):
            # Stubbed and minimal responses carry no metadata.
            return True
        return 200 <= status < 300

    def get_object_data(self) -> Optional[bytes]:
        """ Returns object data.
        """
        try:
            data = self._res['Body'].read()
        except (KeyError, AttributeError, TypeError) as ex:
            warnings.warn(f"Invalid response: {ex}", StorageWarning)
            return None
        else:
            return data
