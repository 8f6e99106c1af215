# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

from collections import OrderedDict

from poco_lab.logger import get_logger

logger = get_logger(__name__)


class CacheService:
    """In-process cache for execution outcomes"""

    def __init__(self, max_entries=200000):
        self.max_entries = max_entries
        self.cache_prefix = "outcome"
        self._store = OrderedDict()
        self.hits = 0
        self.misses = 0
        self.evictions = 0

    def get(self, key):
        """
        Get value from cache

        Args:
            key: Cache key (any hashable)

        Returns:
            Cached value or None if not found
        """
        cache_key = self._build_cache_key(key)
        value = self._store.get(cache_key)
        if value is None:
            self.misses += 1
            return None
        self.hits += 1
        self._store.move_to_end(cache_key)
        return value

    def set(self, key, value):
        """
        Set value in cache, evicting the least recently used entry when full

        Args:
            key: Cache key
            value: Value to cache
        """
        cache_key = self._build_cache_key(key)
        self._store[cache_key] = value
        self._store.move_to_end(cache_key)
        while len(self._store) > self.max_entries:
            self._store.popitem(last=False)
            self.evictions += 1

    def get_or_set(self, key, callback):
        """
        Get value from cache or set it using callback

        Args:
            key: Cache key
            callback: Function to call on a cache miss

        Returns:
            Cached or computed value
        """
        cached_value = self.get(key)
        if cached_value is not None:
            return cached_value

        computed_value = callback()
        self.set(key, computed_value)
        return computed_value

    def get_stats(self):
        """
        Get cache statistics

        Returns:
            dict: Cache statistics
        """
        lookups = self.hits + self.misses
        return {
            "entries": len(self._store),
            "hits": self.hits,
            "misses": self.misses,
            "evictions": self.evictions,
            "hit_rate": round(self.hits / lookups, 4) if lookups else 0.0,
        }

    def _build_cache_key(self, key):
        """Build full cache key with prefix"""
        return (self.cache_prefix, key)
