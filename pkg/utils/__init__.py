"""
Utils module: configuration, seeded substreams, report serialization.
"""
