import asyncio


async def fetch(i: int) -> int:
    await asyncio.sleep(0.01 * i)
    return i * 10


async def main():
    results = await asyncio.gather(*(fetch(i) for i in range(5)))
    print(results)


asyncio.run(main())
