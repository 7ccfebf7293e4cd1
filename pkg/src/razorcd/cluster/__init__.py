from .store import ClusterStore, ResourceKey, ResourceObject, WatchEvent, CrdDefinition

__all__ = ["ClusterStore", "ResourceKey", "ResourceObject", "WatchEvent", "CrdDefinition"]
