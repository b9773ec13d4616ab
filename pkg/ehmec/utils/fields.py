"""Helpers for merging configuration dictionaries."""
from typing import Any, Dict


def dict_deep_update(
    merge_to: Dict[str, Any],
    merge_from: Dict[str, Any],
    inplace: bool = True
) -> Dict[str, Any]:
    """Recursively merge ``merge_from`` into ``merge_to``.

    Nested dictionaries are merged key by key; any other value in
    ``merge_from`` replaces the one in ``merge_to``.

    Args:
        merge_to: Base dictionary, e.g. defaults loaded from a config file
        merge_from: Overrides, e.g. values given on the command line
        inplace: Whether to modify merge_to in-place

    Returns:
        The merged dictionary

    Examples:
        >>> dict_deep_update({"sweep": {"trials": 100}}, {"sweep": {"trials": 5}})
        {'sweep': {'trials': 5}}
    """
    if not inplace:
        merge_to = {
            key: dict(value) if isinstance(value, dict) else value
            for key, value in merge_to.items()
        }

    for key, value in merge_from.items():
        if (
            key in merge_to
            and isinstance(merge_to[key], dict)
            and isinstance(value, dict)
        ):
            merge_to[key] = dict_deep_update(merge_to[key], value, inplace=inplace)
        else:
            merge_to[key] = value

    return merge_to


def drop_none(values: Dict[str, Any]) -> Dict[str, Any]:
    """Copy of ``values`` without keys whose value is ``None``."""
    return {key: value for key, value in values.items() if value is not None}
