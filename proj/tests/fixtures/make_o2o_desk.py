"""Regenerates o2o_desk.csv: a small offline coupon log with two merchants."""
import random

rng = random.Random(2024)
focal_rates = ["20:5", "50:10", "100:30", "0.9", "0.8"]
other_rates = ["30:5", "200:20", "0.95", "0.7", "10:5"]
rows = []
for i in range(198):
    user = 1000 + rng.randrange(70)
    merchant = 1 if (user < 1060 and rng.random() < 0.6) else 2
    day = 1 + rng.randrange(28)
    distance = "null" if rng.random() < 0.1 else str(rng.randrange(11))
    if rng.random() < 0.15:
        rows.append([user, merchant, "null", "null", distance, "null", f"201602{day:02d}"])
        continue
    rate = rng.choice(focal_rates if merchant == 1 else other_rates)
    coupon = (100 if merchant == 1 else 200) + (focal_rates + other_rates).index(rate)
    used = "null"
    if rng.random() < (0.3 if user % 2 else 0.6):
        used = f"201602{min(28, day + rng.randrange(3)):02d}"
    rows.append([user, merchant, coupon, rate, distance, f"201602{day:02d}", used])
rows.append([1001, 1, 105, "abc", "1", "20160203", "null"])
rows.append([1002, 1, 101, "50:10", "2", "20160210", "20160205"])
with open("o2o_desk.csv", "w") as f:
    f.write("User_id,Merchant_id,Coupon_id,Discount_rate,Distance,Date_received,Date\n")
    for r in rows:
        f.write(",".join(str(x) for x in r) + "\n")
