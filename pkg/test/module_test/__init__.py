# Module acceptance tests
