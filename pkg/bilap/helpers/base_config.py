import logging
import os
from typing import Any, Dict, List, Optional, Tuple

from bilap.helpers.utils import str_or_bool

logger = logging.getLogger(__name__)

SUPPORTED_TYPES = (
    str,
    int,
    float,
    bool,
)


class ConfigException(Exception):
    def __init__(self, msg: str, *args):
        formatted_msg = msg.format(*args)
        super().__init__(formatted_msg)


class BaseConfig:
    """
    Class-attribute configuration. Public upper-case attributes are settings;
    values must be of SUPPORTED_TYPES, or dicts of them keyed by str/int.
    """

    UPDATE_FROM_ENV = False
    ENV_KEY_PREFIX = None
    # names that may be overridden from the environment, None means all of them
    ENV_WHITELIST: Optional[Tuple[str, ...]] = None

    def __init__(self, *args, **kwargs):
        if self.UPDATE_FROM_ENV:
            if self.ENV_KEY_PREFIX is None:
                raise RuntimeError(
                    "ENV_KEY_PREFIX must be specified if UPDATE_FROM_ENV==True"
                )
            self.update_from_env()

    def update_from_custom_config(self, class_: "BaseConfig"):
        """
        Copies settings from another config class, then re-applies the environment
        :param class_:
        :return:
        """
        for name, attr in class_.__dict__.items():
            if name.isupper() and not callable(attr):
                setattr(self, name, attr)
        if self.UPDATE_FROM_ENV:
            self.update_from_env()

    def update_from_env(self, environ: Optional[Dict[str, str]] = None):
        """
        Overrides config attributes from environment variables
        :param environ: mapping to read instead of os.environ
        :return:
        """
        environ = os.environ if environ is None else environ
        used = []
        prefix = f"{self.ENV_KEY_PREFIX}__"
        for key, value in environ.items():
            if not key.startswith(prefix):
                continue
            attr_name, *dct_keys = key[len(prefix) :].split("__")
            if self.ENV_WHITELIST is not None and attr_name not in self.ENV_WHITELIST:
                logger.warning(
                    "Setting %s cannot be overridden from environ (it skipped)", key
                )
                continue
            try:
                self._update_attribute(attr_name=attr_name, dct_keys=dct_keys, value=value)
            except Exception as ex:
                logger.warning(
                    "Cannot update config from environ value (it skipped): %s , error: %s",
                    key,
                    str(ex),
                )
                continue
            used.append(key)
        if used:
            logger.info("Attributes parsed from environ: %s", used)

    def as_dict(self) -> Dict[str, Any]:
        """
        Snapshot of every setting, used to stamp reports
        :return:
        """
        names = sorted(
            {
                name
                for klass in type(self).__mro__
                for name in vars(klass)
                if name.isupper() and name not in ("UPDATE_FROM_ENV", "ENV_KEY_PREFIX", "ENV_WHITELIST")
            }
        )
        return {name: getattr(self, name) for name in names}

    @classmethod
    def _convert_value_type_from_exist(cls, exist_value: Any, new_value: str):
        converter = type(exist_value)
        if converter not in SUPPORTED_TYPES:
            raise ConfigException("Unsupported type {} for environ override", converter)
        if converter is bool:
            converter = str_or_bool
        return converter(new_value)

    def _update_attribute(self, attr_name, dct_keys: List, value):
        attr = getattr(self, attr_name)
        if not dct_keys:
            setattr(self, attr_name, self._convert_value_type_from_exist(attr, value))
        else:
            self._recursive_update_value_in_dict(attr, dct_keys, value)

    @classmethod
    def _recursive_update_value_in_dict(cls, base_dct: Dict, dct_vector: List, value):
        key = dct_vector.pop(0)
        if key not in base_dct and key.isdigit():
            key = int(key)
        if dct_vector:
            return cls._recursive_update_value_in_dict(base_dct[key], dct_vector, value)
        if isinstance(base_dct[key], (dict, tuple)):
            raise ConfigException("Cannot replace attribute of {} type from environ", type(base_dct[key]).__name__)
        base_dct[key] = cls._convert_value_type_from_exist(base_dct[key], value)
