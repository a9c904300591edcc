import json
import hashlib
import logging
import os
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)


class CacheManager:
    """Cache for tabulated CDFs: in memory, optionally mirrored to JSON files."""

    def __init__(self, cache_dir: Optional[str] = None, persist: bool = False):
        self.persist = persist
        self.cache_dir = os.path.expanduser(cache_dir or "~/.cache/vg-equations")
        self._memory: Dict[str, Any] = {}
        if self.persist:
            os.makedirs(self.cache_dir, exist_ok=True)

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "CacheManager":
        section = config.get('cache', {})
        return cls(section.get('dir'), persist=bool(section.get('enabled', False)))

    @staticmethod
    def key_hash(key: str) -> str:
        return hashlib.md5(key.encode()).hexdigest()

    def _get_cache_path(self, key: str) -> str:
        """Get file path for cache key."""
        return os.path.join(self.cache_dir, f"{self.key_hash(key)}.json")

    def get(self, key: str) -> Optional[Any]:
        """Get value from memory, then from disk when persistence is on."""
        digest = self.key_hash(key)
        if digest in self._memory:
            logger.debug("Cache hit (memory) for %s", key)
            return self._memory[digest]
        if not self.persist:
            return None

        cache_path = self._get_cache_path(key)
        if not os.path.exists(cache_path):
            return None
        try:
            with open(cache_path, 'r') as f:
                data = json.load(f)
        except (json.JSONDecodeError, IOError):
            return None
        if data.get('key') != key:
            return None
        logger.debug("Cache hit (disk) for %s", key)
        self._memory[digest] = data.get('value')
        return self._memory[digest]

    def set(self, key: str, value: Any) -> bool:
        """Store a JSON-serializable value."""
        self._memory[self.key_hash(key)] = value
        if not self.persist:
            return True
        try:
            with open(self._get_cache_path(key), 'w') as f:
                json.dump({'key': key, 'value': value}, f)
            return True
        except IOError:
            return False

    def clear(self) -> None:
        """Clear all cached items."""
        self._memory.clear()
        if self.persist and os.path.isdir(self.cache_dir):
            for filename in os.listdir(self.cache_dir):
                if filename.endswith('.json'):
                    os.remove(os.path.join(self.cache_dir, filename))
