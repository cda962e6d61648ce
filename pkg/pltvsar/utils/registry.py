import hashlib

from pltvsar.utils.errors import InvalidSpec
from pltvsar.utils.messages import INVALID_OBJECT_ERR

REGISTRIES = {
    "KERNEL_REGISTRY": {},
    "LATTICE_REGISTRY": {},
    "RHO_SHAPE_REGISTRY": {},
    "ERROR_LAW_REGISTRY": {},
    "BETA4_SHAPE_REGISTRY": {},
    "METRIC_REGISTRY": {},
}


def get_object(object_name, object_type):
    registry = REGISTRIES["{}_REGISTRY".format(object_type.upper())]
    if object_name not in registry:
        raise InvalidSpec(
            INVALID_OBJECT_ERR.format(
                object_type.upper(), object_name, sorted(registry.keys())
            )
        )
    return registry[object_name]


def register_object(object_name, object_type):
    def decorator(obj):
        REGISTRIES["{}_REGISTRY".format(object_type.upper())][object_name] = obj
        obj.name = object_name
        return obj

    return decorator


def list_objects(object_type):
    return sorted(REGISTRIES["{}_REGISTRY".format(object_type.upper())].keys())


def md5(key):
    """
    returns a hashed with md5 string of the key
    """
    return hashlib.md5(key.encode()).hexdigest()
