from join import join_orders


def test_matches_orders_with_customers():
    orders = [(1, "book"), (2, "lamp"), (1, "pen")]
    customers = [(1, "ada"), (2, "bob")]
    assert sorted(join_orders(orders, customers)) == [
        (1, ("book", "ada")),
        (1, ("pen", "ada")),
        (2, ("lamp", "bob")),
    ]


def test_unmatched_keys_are_dropped():
    assert join_orders([(3, "cup")], [(1, "ada")]) == []


def test_duplicate_customer_keys():
    assert sorted(join_orders([(1, "a")], [(1, "x"), (1, "y")])) == [(1, ("a", "x")), (1, ("a", "y"))]
